"""Autonomous algebraic ODEs: parsing, rendering, differentiation, series substitution.

An ODE ``E(u, u', ..., u^(N)) = 0`` is stored as a polynomial in the formal
symbols ``u0 .. uN`` (``uk`` is the k-th derivative) whose coefficients live
in a :class:`~briotbouquet.arith.ParamField`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyRing

from .arith import ParamField, rat, render, substitute
from .errors import (NonAutonomousError, OdeSyntaxError, TruncationTooShort,
                     UndeclaredSymbolError)
from .series import LaurentSeries

MAX_ORDER = 12
INDEPENDENT_NAMES = ("xi", "x", "t")
_U_NAME = re.compile(r"u(\d+)$")


def u_ring(params: ParamField, order: int) -> PolyRing:
    return PolyRing([f"u{k}" for k in range(order + 1)], params.field.to_domain(), grlex)


# ---------------------------------------------------------------------------
# tokenizer / recursive-descent parser
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def _tokenize(text):
    pos, out = 0, []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            stripped = len(text[pos:]) - len(text[pos:].lstrip())
            raise OdeSyntaxError(f"unexpected character {text[pos + stripped]!r}", text, pos + stripped)
        start = m.start(m.lastindex)
        num, ident, op = m.groups()
        if num is not None:
            if "." in num:
                raise OdeSyntaxError("floating-point literals are not allowed; use p/q", text, start)
            out.append(("num", int(num), start))
        elif ident is not None:
            out.append(("id", ident, start))
        else:
            out.append(("op", "^" if op == "**" else op, start))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text, params: ParamField, ring: PolyRing | None):
        self.text = text
        self.params = params
        self.ring = ring
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise OdeSyntaxError(msg, self.text, tok[2])

    def expect(self, op):
        t = self.take()
        if t[0] != "op" or t[1] != op:
            self.fail(f"expected {op!r}", t)

    # values are ring elements when ``ring`` is set, field elements otherwise
    def const(self, c):
        if self.ring is not None:
            return self.ring(self.params.field(rat(c)))
        return self.params.field(rat(c))

    def is_u_free(self, v):
        if self.ring is None:
            return True
        return v.is_ground

    def as_coeff(self, v):
        return v.LC if self.ring is not None and v else (v if self.ring is None else self.params.zero)

    def parse(self):
        v = self.expr()
        t = self.peek()
        if t[0] != "end":
            self.fail("unexpected token", t)
        return v

    def expr(self):
        v = self.term()
        while True:
            t = self.peek()
            if t[0] == "op" and t[1] in "+-":
                self.take()
                w = self.term()
                v = v + w if t[1] == "+" else v - w
            else:
                return v

    def term(self):
        v = self.unary()
        while True:
            t = self.peek()
            if t[0] == "op" and t[1] in "*/":
                self.take()
                w = self.unary()
                if t[1] == "*":
                    v = v * w
                else:
                    v = self.divide(v, w, t)
            else:
                return v

    def divide(self, v, w, tok):
        if not self.is_u_free(w):
            self.fail("division by an expression involving u is not allowed", tok)
        c = self.as_coeff(w)
        if not c:
            self.fail("division by zero", tok)
        inv = 1 / c
        return v.mul_ground(inv) if self.ring is not None else v * inv

    def unary(self):
        t = self.peek()
        if t[0] == "op" and t[1] in "+-":
            self.take()
            v = self.unary()
            return -v if t[1] == "-" else v
        return self.power()

    def power(self):
        base = self.atom()
        t = self.peek()
        if t[0] == "op" and t[1] == "^":
            self.take()
            e = self.exponent()
            if e < 0:
                if not self.is_u_free(base):
                    self.fail("negative power of an expression involving u", t)
                c = self.as_coeff(base)
                if not c:
                    self.fail("division by zero", t)
                inv = 1 / c
                base = self.ring(inv) if self.ring is not None else inv
                e = -e
            return base ** e
        return base

    def exponent(self):
        t = self.peek()
        sign = 1
        if t[0] == "op" and t[1] in "+-":
            self.take()
            sign = -1 if t[1] == "-" else 1
            t = self.peek()
        if t[0] == "num":
            self.take()
            return sign * t[1]
        if t[0] == "op" and t[1] == "(":
            self.take()
            e = self.exponent()
            self.expect(")")
            return sign * e
        self.fail("exponent must be an integer literal", t)

    def atom(self):
        t = self.take()
        kind, val, pos = t
        if kind == "num":
            return self.const(val)
        if kind == "op" and val == "(":
            v = self.expr()
            self.expect(")")
            return v
        if kind == "id":
            if val in self.params.gens:
                g = self.params.gens[val]
                return self.ring(g) if self.ring is not None else g
            m = _U_NAME.match(val)
            if m:
                k = int(m.group(1))
                if k > MAX_ORDER:
                    raise OdeSyntaxError(f"derivative order {k} exceeds the cap {MAX_ORDER}", self.text, pos)
                if self.ring is None:
                    raise OdeSyntaxError(f"{val} not allowed in a coefficient expression", self.text, pos)
                return self.ring.gens[k]
            if val in INDEPENDENT_NAMES:
                raise NonAutonomousError(
                    f"independent variable {val!r} at position {pos}: the ODE must be autonomous")
            raise UndeclaredSymbolError(f"undeclared symbol {val!r} at position {pos}")
        self.fail("unexpected token", t)


def parse_expression(text: str, params: ParamField):
    """Parse a u-free expression into an element of ``params``' field."""
    return _Parser(text, params, None).parse()


def parse_params(decl: str) -> ParamField:
    """``"nu != 0, b, mu, A"`` -> ParamField with ``nu`` declared nonzero."""
    names, nonzero = [], []
    for raw in decl.split(","):
        item = raw.strip()
        if not item:
            continue
        m = re.fullmatch(r"([A-Za-z_][A-Za-z_0-9]*)\s*(!=\s*0)?", item)
        if not m:
            raise OdeSyntaxError(f"bad parameter declaration {item!r}", decl, decl.find(item))
        name = m.group(1)
        if _U_NAME.match(name) or name in INDEPENDENT_NAMES:
            raise OdeSyntaxError(f"reserved name {name!r} used as a parameter", decl, decl.find(item))
        names.append(name)
        if m.group(2):
            nonzero.append(name)
    return ParamField(names, nonzero)


# ---------------------------------------------------------------------------
# the ODE value type
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AutonomousODE:
    poly: object            # PolyElement in Q(params)[u0..uN]
    params: ParamField

    def __post_init__(self):
        if not self.poly:
            raise ValueError("the zero polynomial is not an ODE")
        if self.order < 0:
            raise ValueError("ODE does not involve u")

    @property
    def order(self) -> int:
        degs = self.poly.degrees()
        used = [k for k, d in enumerate(degs) if d > 0]
        return max(used) if used else -1

    def terms(self):
        """``[(exponents (e0..eN), coefficient)]`` in graded-lex order."""
        return self.poly.terms()

    def render(self) -> str:
        return render_u_poly(self.poly)

    def __str__(self):
        return self.render()

    def __eq__(self, other):
        return (isinstance(other, AutonomousODE) and self.params.names == other.params.names
                and self.poly.ring.symbols == other.poly.ring.symbols
                and dict(self.poly.terms()) == dict(other.poly.terms()))

    def __hash__(self):
        return hash(self.render())

    def over(self, params: ParamField, values: Mapping | None = None) -> "AutonomousODE":
        """The same ODE with coefficients moved to ``params`` (optionally substituting symbols)."""
        ring = u_ring(params, self.order)
        out = {}
        for mon, c in self.poly.terms():
            v = substitute(c, self.params, params, values) if values else params.convert(c)
            if v:
                out[mon[:self.order + 1]] = v
        return AutonomousODE(ring.from_dict(out) if out else ring.zero, params)


def render_u_poly(poly) -> str:
    """Canonical text for a polynomial in u0..uN with rational-function coefficients."""
    if not poly:
        return "0"
    names = [str(s) for s in poly.ring.symbols]
    out = []
    for mon, c in poly.terms():
        mon_s = "*".join(n if e == 1 else f"{n}^{e}" for n, e in zip(names, mon) if e)
        simple = c.denom.is_ground and len(c.numer.terms()) == 1
        neg = len(c.numer.terms()) == 1 and c.numer.LC < 0
        cs = render(-c if neg else c)
        if not simple:
            cs = f"({cs})"
        if mon_s:
            body = mon_s if cs == "1" else f"{cs}*{mon_s}"
        else:
            body = cs
        if not out:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


def parse_ode(text: str, param_decl: str | ParamField = "") -> AutonomousODE:
    """Parse ``text`` (grammar: rationals, parameters, u0..u12, + - * / ^ ( ))."""
    params = param_decl if isinstance(param_decl, ParamField) else parse_params(param_decl)
    full = u_ring(params, MAX_ORDER)
    value = _Parser(text, params, full).parse()
    if not value:
        raise OdeSyntaxError("the equation is identically zero", text, 0)
    degs = value.degrees()
    used = [k for k, d in enumerate(degs) if d > 0]
    if not used:
        raise OdeSyntaxError("the equation does not involve u", text, 0)
    order = max(used)
    ring = u_ring(params, order)
    poly = ring.from_dict({m[:order + 1]: c for m, c in value.terms()})
    return AutonomousODE(poly, params)


def parse_u_poly(text: str, params: ParamField, order: int):
    """Parse a differential polynomial (e.g. a rendered subequation) into ``u_ring(params, order)``."""
    full = u_ring(params, MAX_ORDER)
    value = _Parser(text, params, full).parse()
    degs = value.degrees() if value else ()
    if any(d and k > order for k, d in enumerate(degs)):
        raise OdeSyntaxError(f"expression involves derivatives above u{order}", text, 0)
    ring = u_ring(params, order)
    return ring.from_dict({m[:order + 1]: c for m, c in value.terms()}) if value else ring.zero


# ---------------------------------------------------------------------------
# differentiation and series substitution
# ---------------------------------------------------------------------------

def total_derivative(expr):
    """d/dxi of a differential polynomial: sum_k dP/du_k * u_(k+1).

    ``expr`` is a polynomial in u0..uN (or an :class:`AutonomousODE`); the
    result lives in the ring with one more derivative symbol.
    """
    if isinstance(expr, AutonomousODE):
        return AutonomousODE(total_derivative(expr.poly), expr.params)
    ring = expr.ring
    n = ring.ngens
    if n > MAX_ORDER + 1:
        raise ValueError("derivative order cap exceeded")
    big = PolyRing([f"u{k}" for k in range(n + 1)], ring.domain, grlex)
    e = expr.set_ring(big)
    out = big.zero
    for k in range(n):
        d = e.diff(big.gens[k])
        if d:
            out += d * big.gens[k + 1]
    return out


class SeriesPowers:
    """Cached powers of ``s`` and its derivatives, for expanding differential monomials.

    With ``upto`` set, every product stops at that exponent; intermediate
    powers are computed only as far as the remaining factors allow.
    """

    def __init__(self, s: LaurentSeries, upto: int | None = None):
        self.upto = upto
        self.field = s.field
        self.derivs = [s]
        self._cache: dict[tuple, LaurentSeries] = {}

    def deriv(self, k: int) -> LaurentSeries:
        while len(self.derivs) <= k:
            self.derivs.append(self.derivs[-1].derivative())
        return self.derivs[k]

    def power(self, k: int, e: int, upto: int | None) -> LaurentSeries:
        key = (k, e, upto)
        if key not in self._cache:
            d = self.deriv(k)
            if e == 1:
                out = d if upto is None else d.truncate(upto)
            else:
                sub = None if upto is None else upto - d.offset
                out = self.power(k, e - 1, sub).mul(d, upto)
            self._cache[key] = out
        return self._cache[key]

    def monomial(self, mon) -> LaurentSeries:
        """Series of ``prod u_k^mon[k]``."""
        factors = [(k, e) for k, e in enumerate(mon) if e]
        if not factors:
            one = LaurentSeries(0, [self.field.one], None, self.field)
            return one if self.upto is None else one.truncate(self.upto)
        lows = [e * self.deriv(k).offset for k, e in factors]
        total_low = sum(lows)
        acc = None
        for (k, e), low in zip(factors, lows):
            bound = None if self.upto is None else self.upto - (total_low - low)
            p = self.power(k, e, bound)
            acc = p if acc is None else acc.mul(p, self.upto)
        return acc


def evaluate_on_series(poly, s: LaurentSeries, upto: int | None = None) -> LaurentSeries:
    """Expand a polynomial in u0..uN with ``u = s`` (exponents <= ``upto`` when given)."""
    powers = SeriesPowers(s, upto)
    total = LaurentSeries.zero(s.field, upto)
    for mon, c in poly.terms():
        if c.field is not s.field:
            raise ValueError("series and coefficients live in different fields")
        total = total + powers.monomial(mon).scale(c)
    return total


def substitute_series(ode: AutonomousODE, s: LaurentSeries, order: int | None = None) -> LaurentSeries:
    """Laurent expansion of ``E(s, s', ..., s^(N))``.

    With ``order`` given, only exponents up to ``order`` are computed and a
    :class:`TruncationTooShort` is raised if ``s`` cannot determine them.
    """
    if ode.poly.ring.domain.field is not s.field:
        ode = ode.over(_param_field_of(s.field, ode.params))
    out = evaluate_on_series(ode.poly, s, order)
    if order is not None and out.prec is not None and out.prec < order:
        raise TruncationTooShort(
            f"series known to chi^{s.prec} determines E only through chi^{out.prec}, "
            f"chi^{order} requested")
    return out


def _param_field_of(field, like: ParamField) -> ParamField:
    names = [str(g) for g in field.symbols]
    return ParamField(names, like.nonzero, like.origins)
