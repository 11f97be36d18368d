"""Exact arithmetic kernel.

Rationals are gmpy2 ``mpq`` (via sympy's ``QQ``); multivariate polynomials
and rational functions in the declared parameter symbols are sympy's sparse
``PolyElement`` / ``FracElement`` over ``QQ`` with graded-lexicographic
order, the order being the user's parameter declaration order.

On top of those this module provides the pieces the pipeline relies on:
a :class:`ParamField` context (symbol bookkeeping, conversion, substitution),
the canonical text renderer, normalised gcds, the limited factoriser and a
fraction-free (Bareiss) linear solver with full pivoting.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import reduce
from typing import Iterable, Mapping, NamedTuple, Sequence

from sympy.polys.domains import QQ
from sympy.polys.fields import FracElement, FracField
from sympy.polys.orderings import grlex
from sympy.polys.polyerrors import ExactQuotientFailed
from sympy.polys.rings import PolyElement

from .errors import DivisionByZeroDenominator, InternalInconsistency

MPoly = PolyElement
FracElem = FracElement
Rat = type(QQ(1))

ORIGIN_PARAMETER = "parameter"
ORIGIN_RESONANCE = "resonance"
ORIGIN_UNKNOWN = "unknown"


def rat(x) -> Rat:
    """Coerce int, Fraction, mpq or a ``"p/q"`` string to an exact rational."""
    if isinstance(x, str):
        num, _, den = x.partition("/")
        return QQ(int(num), int(den) if den else 1)
    if hasattr(x, "numerator") and hasattr(x, "denominator"):
        return QQ(int(x.numerator), int(x.denominator))
    return QQ(x)


class ParamField:
    """The coefficient field Q(p1, ..., pn).

    ``nonzero`` lists symbols assumed nonvanishing (``nu != 0``); ``origins``
    tags each symbol as an equation parameter, a resonance (integration)
    constant or an internal unknown, so reports can tell them apart.
    """

    def __init__(self, names: Sequence[str] = (), nonzero: Iterable[str] = (),
                 origins: Mapping[str, str] | None = None):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate symbol in {self.names}")
        self.nonzero = frozenset(n for n in nonzero if n in self.names)
        origins = dict(origins or {})
        self.origins = {n: origins.get(n, ORIGIN_PARAMETER) for n in self.names}
        self.field = FracField(self.names, QQ, grlex)
        self.ring = self.field.ring
        self.gens = dict(zip(self.names, self.field.gens))
        self.zero = self.field.zero
        self.one = self.field.one

    def __repr__(self):
        return f"ParamField({', '.join(self.names)})"

    def __eq__(self, other):
        return (isinstance(other, ParamField) and self.names == other.names
                and self.nonzero == other.nonzero and self.origins == other.origins)

    def __hash__(self):
        return hash((self.names, self.nonzero))

    def __call__(self, x) -> FracElem:
        if isinstance(x, FracElement):
            return self.convert(x)
        if isinstance(x, PolyElement):
            return self.field.new(x.set_ring(self.ring))
        if isinstance(x, str):
            return self.parse(x)
        return self.field(rat(x))

    def gen(self, name: str) -> FracElem:
        return self.gens[name]

    def symbols_of_origin(self, origin: str) -> list[str]:
        return [n for n in self.names if self.origins[n] == origin]

    def extend(self, names: Sequence[str], origin: str = ORIGIN_PARAMETER,
               nonzero: Iterable[str] = ()) -> "ParamField":
        new = [n for n in names if n not in self.names]
        if not new:
            return self
        origins = dict(self.origins)
        origins.update({n: origin for n in new})
        return ParamField(self.names + tuple(new), self.nonzero | set(nonzero), origins)

    def without(self, names: Iterable[str]) -> "ParamField":
        drop = set(names)
        keep = [n for n in self.names if n not in drop]
        return ParamField(keep, self.nonzero - drop, {n: self.origins[n] for n in keep})

    def union(self, other: "ParamField") -> "ParamField":
        origins = dict(other.origins)
        origins.update(self.origins)
        names = self.names + tuple(n for n in other.names if n not in self.names)
        return ParamField(names, self.nonzero | other.nonzero, origins)

    def convert(self, x: FracElem) -> FracElem:
        """Map an element of another field into this one, matching symbols by name."""
        if x.field is self.field:
            return x
        return self.field.new(x.numer.set_ring(self.ring), x.denom.set_ring(self.ring))

    def poly(self, x) -> MPoly:
        """Numerator-ring image of a polynomial-valued element (raises if not polynomial)."""
        if isinstance(x, PolyElement):
            return x.set_ring(self.ring)
        x = self(x)
        if x.denom != 1:
            num, den = x.numer, x.denom
            if den.is_ground:
                return num.quo_ground(den.LC)
            raise ValueError(f"{render(x)} is not a polynomial")
        return x.numer

    def is_constant(self, x: FracElem) -> bool:
        return x.numer.is_ground and x.denom.is_ground

    def free_symbols(self, x: FracElem | MPoly) -> list[str]:
        polys = [x] if isinstance(x, PolyElement) else [x.numer, x.denom]
        used = set()
        for p in polys:
            for mon in p.monoms():
                used.update(i for i, e in enumerate(mon) if e)
        return [self.names[i] for i in sorted(used)]

    def parse(self, text: str) -> FracElem:
        from .ode import parse_expression
        return parse_expression(text, self)

    def render(self, x) -> str:
        return render(x)

    def is_nonzero_monomial(self, p: MPoly) -> bool:
        """True when ``p`` is c * (monomial in symbols declared nonzero)."""
        if len(p.terms()) != 1:
            return False
        (mon, _), = p.terms()
        return all(e == 0 or self.names[i] in self.nonzero for i, e in enumerate(mon))

    def strip_nonzero_factors(self, p: MPoly) -> MPoly:
        """Remove the monomial content in symbols declared nonzero, and make primitive."""
        if not p:
            return p
        terms = p.terms()
        nvar = len(self.names)
        mins = [min(m[i] for m, _ in terms) for i in range(nvar)]
        shift = tuple(mins[i] if self.names[i] in self.nonzero else 0 for i in range(nvar))
        if any(shift):
            p = self.ring.from_dict({tuple(a - b for a, b in zip(m, shift)): c for m, c in terms})
        return primitive(p)


# ---------------------------------------------------------------------------
# substitution
# ---------------------------------------------------------------------------

def eval_poly(p: MPoly, values: Sequence, one) -> object:
    """Evaluate ``p`` with generator i replaced by ``values[i]``.

    ``values`` may hold any ring-like objects (FracElem, PolyElement, mpmath
    numbers); ``one`` is the unit of the target. Powers are cached.
    """
    cache: dict[tuple[int, int], object] = {}

    def power(i, e):
        key = (i, e)
        if key not in cache:
            if e == 1:
                cache[key] = values[i]
            else:
                h = e // 2
                sq = power(i, h) * power(i, h)
                cache[key] = sq * values[i] if e % 2 else sq
        return cache[key]

    total = one * 0
    for mon, c in p.terms():
        t = one * _coeff_to(c, one)
        for i, e in enumerate(mon):
            if e:
                t = t * power(i, e)
        total = total + t
    return total


def _coeff_to(c, one):
    if isinstance(one, (FracElement, PolyElement)):
        return c
    import mpmath
    return mpmath.mpf(int(c.numerator)) / int(c.denominator)


def substitute(x: FracElem, source: ParamField, target: ParamField,
               values: Mapping[str, FracElem] | None = None) -> FracElem:
    """Rewrite ``x`` (in ``source``) into ``target`` with some symbols replaced.

    Symbols absent from ``values`` must exist in ``target`` and map to the
    generator of the same name.
    """
    values = dict(values or {})
    imgs = []
    for n in source.names:
        if n in values:
            imgs.append(target(values[n]))
        elif n in target.gens:
            imgs.append(target.gens[n])
        else:
            imgs.append(None)
    x = source.convert(x) if x.field is not source.field else x
    used = source.free_symbols(x)
    for n in used:
        if imgs[source.names.index(n)] is None:
            raise ValueError(f"symbol {n} has no image in {target}")
    imgs = [v if v is not None else target.zero for v in imgs]
    num = eval_poly(x.numer, imgs, target.one)
    den = eval_poly(x.denom, imgs, target.one)
    if not den:
        raise DivisionByZeroDenominator(
            f"denominator {render(x.denom)} vanishes under the substitution")
    return num / den


# ---------------------------------------------------------------------------
# canonical rendering
# ---------------------------------------------------------------------------

def _fmt_rat(c) -> str:
    c = rat(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _fmt_monomial(mon, names) -> str:
    parts = []
    for e, n in zip(mon, names):
        if e == 1:
            parts.append(n)
        elif e > 1:
            parts.append(f"{n}^{e}")
    return "*".join(parts)


def render_poly(p: MPoly, names: Sequence[str] | None = None) -> str:
    """Graded-lex canonical text: explicit ``*`` and ``^``, rationals as ``p/q``."""
    if not p:
        return "0"
    names = names if names is not None else [str(s) for s in p.ring.symbols]
    out = []
    for mon, c in p.terms():  # ring order (grlex), descending
        c = rat(c)
        neg = c < 0
        a = -c if neg else c
        m = _fmt_monomial(mon, names)
        if not m:
            body = _fmt_rat(a)
        elif a == 1:
            body = m
        else:
            body = f"{_fmt_rat(a)}*{m}"
        if not out:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


def _is_atomic(p: MPoly) -> bool:
    terms = p.terms()
    if len(terms) != 1:
        return False
    (mon, c), = terms
    if sum(1 for e in mon if e) == 0:
        return rat(c).denominator == 1 and c > 0
    return c == 1 and sum(1 for e in mon if e) == 1 and max(mon) == 1


def render(x, names: Sequence[str] | None = None) -> str:
    """Render a rational function (or polynomial) in canonical text."""
    if isinstance(x, PolyElement):
        return render_poly(x, names)
    num, den = x.numer, x.denom
    if den == 1:
        return render_poly(num, names)
    if den.is_ground:
        # c * poly / d : fold the constant into the coefficients
        return render_poly(num.quo_ground(den.LC), names)
    ns = render_poly(num, names)
    if len(num.terms()) > 1:
        ns = f"({ns})"
    ds = render_poly(den, names)
    if not _is_atomic(den):
        ds = f"({ds})"
    return f"{ns}/{ds}"


# ---------------------------------------------------------------------------
# gcd, normalisation, factorisation
# ---------------------------------------------------------------------------

def monic(p: MPoly) -> MPoly:
    return p.monic() if p else p


def primitive(p: MPoly) -> MPoly:
    """Integer-coprime coefficients with positive graded-lex leading coefficient."""
    if not p:
        return p
    coeffs = [rat(c) for c in p.coeffs()]
    den = reduce(lambda a, b: a * b // _igcd(a, b), (int(c.denominator) for c in coeffs), 1)
    nums = [int(c.numerator) * (den // int(c.denominator)) for c in coeffs]
    g = reduce(_igcd, (abs(n) for n in nums))
    scale = QQ(den, g)
    if rat(p.LC) < 0:
        scale = -scale
    return p.mul_ground(scale)


def _igcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def mpoly_gcd(a: MPoly, b: MPoly) -> MPoly:
    """Monic (graded-lex) greatest common divisor; ``gcd(p, 0)`` is ``monic(p)``."""
    if not a:
        return monic(b)
    if not b:
        return monic(a)
    return monic(a.gcd(b))


def gcd_many(polys: Iterable[MPoly]) -> MPoly:
    g = None
    for p in polys:
        if not p:
            continue
        g = p if g is None else g.gcd(p)
        if g.is_ground:
            break
    return monic(g) if g is not None else None


class Factor(NamedTuple):
    poly: MPoly
    multiplicity: int
    flagged: bool = False


@dataclass
class Factorization:
    """``p == content * prod(f.poly ** f.multiplicity)``.

    Factors that are linear in at least one variable are reported plainly;
    anything else is returned as-is with ``flagged=True`` so callers know the
    factoriser stopped there.
    """

    content: Rat
    factors: list[Factor] = dc_field(default_factory=list)

    @property
    def flagged(self) -> list[Factor]:
        return [f for f in self.factors if f.flagged]

    def pairs(self) -> list[tuple[MPoly, int]]:
        return [(f.poly, f.multiplicity) for f in self.factors]

    def expand(self) -> MPoly:
        out = None
        for f in self.factors:
            t = f.poly ** f.multiplicity
            out = t if out is None else out * t
        if out is None:
            return None
        return out.mul_ground(self.content)


def total_degree(p: MPoly) -> int:
    return max((sum(m) for m in p.monoms()), default=0) if p else -1


def _linear_in_some_var(p: MPoly) -> bool:
    return any(d == 1 for d in p.degrees())


def factor_limited(p: MPoly) -> Factorization:
    """Content, square-free parts and rational linear factors of ``p``.

    Factors come back monic in graded-lex order, sorted by (total degree,
    canonical text). Irreducible factors of degree >= 2 in every variable
    are not split further by the pipeline and carry ``flagged=True``.
    """
    if not p:
        raise ValueError("factor_limited of the zero polynomial")
    content, parts = p.factor_list()
    out = []
    for f, k in parts:
        if f.is_ground:
            content *= f.LC ** k
            continue
        lc = f.LC
        content *= lc ** k
        f = f.quo_ground(lc)
        out.append(Factor(f, k, not _linear_in_some_var(f)))
    out.sort(key=lambda fa: (total_degree(fa.poly), render_poly(fa.poly), fa.multiplicity))
    return Factorization(rat(content), out)


def roots_in_variable(p: MPoly, var: int) -> tuple[list[tuple[FracElem, int]], list[Factor]]:
    """Roots of ``p`` viewed as a polynomial in generator ``var``.

    Returns ``(roots, unresolved)``: roots as rational functions of the other
    generators (with multiplicity) from factors linear in ``var``, and the
    factors of degree >= 2 in ``var`` that could not be split.
    """
    fz = factor_limited(p)
    roots, unresolved = [], []
    field = p.ring.to_field()
    for f in fz.factors:
        d = f.poly.degree(var)
        if d == 0:
            continue
        if d == 1:
            c1 = f.poly.coeff_wrt(var, 1)
            c0 = f.poly.coeff_wrt(var, 0)
            roots.append((field.new(-c0) / field.new(c1), f.multiplicity))
        else:
            unresolved.append(f)
    return roots, unresolved


# ---------------------------------------------------------------------------
# fraction-free linear algebra
# ---------------------------------------------------------------------------

@dataclass
class BareissResult:
    """Outcome of :func:`bareiss_solve`.

    ``solution`` is a particular solution (free unknowns set to 0),
    ``nullspace`` a basis of the homogeneous solutions, ``residuals`` the
    primitive numerators of the rows left unsatisfied (conditions on the
    parameters), ``pivot_rows`` / ``pivot_cols`` original indices in pivot
    order.
    """

    solution: list
    nullspace: list[list]
    residuals: list[MPoly]
    rank: int
    pivot_rows: list[int]
    pivot_cols: list[int]
    residual_rows: list[int] = dc_field(default_factory=list)


def _clear_row(row: Sequence[FracElem], rhs: FracElem):
    dens = [e.denom for e in row if e] + ([rhs.denom] if rhs else [])
    if not dens:
        ring = rhs.field.ring
        return [ring.zero for _ in row], ring.zero
    lcm = reduce(lambda a, b: a.lcm(b), dens)
    out = []
    for e in row:
        out.append(e.numer * lcm.exquo(e.denom) if e else lcm.ring.zero)
    r = rhs.numer * lcm.exquo(rhs.denom) if rhs else lcm.ring.zero
    return out, r


def bareiss_solve(A: Sequence[Sequence[FracElem]], rhs: Sequence[FracElem]) -> BareissResult:
    """Solve ``A x = rhs`` exactly by fraction-free elimination with full pivoting.

    The pivot is the nonzero entry of the active block with the fewest
    terms, ties broken row-major. Rows are first scaled to polynomial
    entries; each elimination step divides exactly by the previous pivot.
    """
    n = len(A)
    if n == 0:
        return BareissResult([], [], [], 0, [], [])
    c = len(A[0])
    fld = (rhs[0] if rhs else A[0][0]).field
    M = []
    for row, r in zip(A, rhs):
        prow, pr = _clear_row(row, r)
        M.append(prow + [pr])
    rows = list(range(n))
    cols = list(range(c))
    ring = M[0][0].ring
    prev = ring.one
    rank = 0
    for k in range(min(n, c)):
        best = None
        for i in range(k, n):
            Mi = M[i]
            for j in range(k, c):
                e = Mi[j]
                if e:
                    key = (len(e), i, j)
                    if best is None or key < best[0]:
                        best = (key, i, j)
        if best is None:
            break
        _, pi, pj = best
        if pi != k:
            M[k], M[pi] = M[pi], M[k]
            rows[k], rows[pi] = rows[pi], rows[k]
        if pj != k:
            for Mi in M:
                Mi[k], Mi[pj] = Mi[pj], Mi[k]
            cols[k], cols[pj] = cols[pj], cols[k]
        piv = M[k][k]
        Mk = M[k]
        for i in range(k + 1, n):
            Mi = M[i]
            f = Mi[k]
            for j in range(k + 1, c + 1):
                v = piv * Mi[j]
                if f and Mk[j]:
                    v = v - f * Mk[j]
                if v and prev != 1:
                    try:
                        v = v.exquo(prev)
                    except ExactQuotientFailed as exc:
                        raise DivisionByZeroDenominator(
                            "inexact Bareiss division: degenerate pivot") from exc
                Mi[j] = v
            Mi[k] = ring.zero
        prev = piv
        rank += 1

    residual_rows, residuals = [], []
    for i in range(rank, n):
        if M[i][c]:
            residual_rows.append(rows[i])
            residuals.append(primitive(M[i][c]))

    def back_substitute(rhs_col, free_values):
        x = [None] * c
        for j in range(rank, c):
            x[j] = free_values.get(j, fld.zero)
        for i in range(rank - 1, -1, -1):
            s = fld.new(rhs_col[i]) if rhs_col[i] else fld.zero
            for j in range(i + 1, c):
                if M[i][j] and x[j]:
                    s -= fld.new(M[i][j]) * x[j]
            if not M[i][i]:
                raise InternalInconsistency("zero pivot after elimination")
            x[i] = s / fld.new(M[i][i])
        out = [None] * c
        for pos, col in enumerate(cols):
            out[col] = x[pos]
        return out

    rhs_col = [M[i][c] for i in range(n)] + [ring.zero] * max(0, c - n)
    solution = back_substitute(rhs_col, {})
    nullspace = []
    zero_col = [ring.zero] * max(n, c)
    for j in range(rank, c):
        nullspace.append(back_substitute(zero_col, {j: fld.one}))
    return BareissResult(solution, nullspace, residuals, rank, rows[:rank], cols[:rank], residual_rows)
