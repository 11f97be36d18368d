"""Movable poles: dominant balances, Fuchs indices, Laurent recursion, residue sums."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Mapping, Sequence

from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyRing

from .arith import (ORIGIN_RESONANCE, Factorization, ParamField, factor_limited,
                    primitive, rat, render, render_poly)
from .errors import (DegenerateBalance, InternalInconsistency, LogarithmRequired,
                     NoPoleFamily)
from .ode import AutonomousODE
from .series import CoefficientStream, LaurentSeries, falling


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExcludedFamily:
    """A balance whose leading coefficient is not a rational function of the parameters."""

    p: int
    factor: str
    degree: int
    reason: str = "non-rational leading coefficient"


@dataclass(frozen=True)
class PoleFamily:
    """``u ~ u0 * chi^p`` with the terms of the ODE that balance at that order."""

    p: int
    u0: object                      # FracElem in ``params``
    params: ParamField
    dominant_terms: tuple            # exponent vectors of the balancing ODE monomials
    valuation: int                   # q: common power of the dominant terms
    multiplicity: int = 1            # multiplicity of u0 as a root of the leading equation

    def render(self) -> str:
        return f"p={self.p}, u0={render(self.u0)}"


@dataclass(frozen=True)
class IndicialData:
    """Indicial polynomial ``P(j)`` of a family and what is known about its roots."""

    poly: object                     # PolyElement in Q(params)[j]
    factorization: Factorization     # of the cleared numerator, in Q[params, j]
    rational_roots: tuple            # ((root: Fraction, multiplicity), ...)
    irreducible: tuple               # rendered factors of degree >= 2 in j

    @property
    def positive_integer_indices(self) -> list[int]:
        return sorted(int(r) for r, _ in self.rational_roots if r.denominator == 1 and r > 0)

    def render(self) -> str:
        """Factored text, e.g. ``nu*(j + 1)*(j^2 - 13*j + 60)``."""
        parts = []
        c = self.factorization.content
        # parameter-only factors first; j is the last generator
        ordered = sorted(self.factorization.factors,
                         key=lambda f: f.poly.degree(f.poly.ring.ngens - 1) > 0)
        for f in ordered:
            s = render_poly(f.poly)
            if len(f.poly.terms()) > 1:
                s = f"({s})"
            parts.append(s if f.multiplicity == 1 else f"{s}^{f.multiplicity}")
        body = "*".join(parts)
        if c == 1 and body:
            return body
        if c == -1 and body:
            return f"-{body}"
        cs = render(self.factorization.factors[0].poly.ring(c)) if self.factorization.factors else str(c)
        return f"{cs}*{body}" if body else cs


@dataclass
class LaurentFamily:
    """A pole family together with its Laurent series."""

    family: PoleFamily
    series: LaurentSeries
    params: ParamField                   # parameters plus resonance symbols
    resonance_syms: list = dc_field(default_factory=list)   # [(index, name)]
    indicial: IndicialData | None = None
    noLog_ok: bool = True

    @property
    def terms(self) -> int:
        return len(self.series.coeffs)

    def coefficients(self) -> list:
        return list(self.series.coeffs)


@dataclass(frozen=True)
class ResidueCondition:
    """Necessary condition ``expr = 0`` (numerator of the summed chi^-1 coefficients)."""

    expr: object          # MPoly in the parameters (possibly zero)
    value: object         # the summed coefficient as a FracElem
    power: int = 1

    @property
    def trivial(self) -> bool:
        return not self.expr

    def render(self) -> str:
        return render(self.expr) if self.expr else "0"


# ---------------------------------------------------------------------------
# leading orders
# ---------------------------------------------------------------------------

def _degree_weight(mon) -> tuple[int, int]:
    return sum(mon), sum(k * e for k, e in enumerate(mon))


def _candidate_orders(ode: AutonomousODE) -> list[int]:
    groups = sorted({_degree_weight(m) for m, _ in ode.terms()})
    out = set()
    for i, (d1, w1) in enumerate(groups):
        for d2, w2 in groups[i + 1:]:
            if d1 == d2:
                continue
            p = Fraction(w1 - w2, d1 - d2)
            if p.denominator == 1 and p < 0:
                out.add(int(p))
    return sorted(out)


def _leading_equation(ode: AutonomousODE, p: int):
    """Dominant monomials at order ``p`` and the leading polynomial ``G(u0)``, by degree."""
    vals = {m: _degree_weight(m)[0] * p - _degree_weight(m)[1] for m, _ in ode.terms()}
    q = min(vals.values())
    dominant = tuple(m for m, _ in ode.terms() if vals[m] == q)
    by_degree: dict[int, object] = {}
    for m, c in ode.terms():
        if vals[m] != q:
            continue
        d = sum(m)
        f = 1
        for k, e in enumerate(m):
            f *= falling(p, k) ** e
        by_degree[d] = by_degree.get(d, ode.params.zero) + c * f
    by_degree = {d: c for d, c in by_degree.items() if c}
    return q, dominant, by_degree


def leading_order_analysis(ode: AutonomousODE) -> tuple[list[PoleFamily], list[ExcludedFamily]]:
    """All negative-integer balances, split into usable families and excluded ones."""
    params = ode.params
    candidates = _candidate_orders(ode)
    if not candidates:
        raise NoPoleFamily(f"no negative-integer balance for {ode.render()}")
    ring = PolyRing(list(params.names) + ["u0"], params.field.domain, grlex)
    var = ring.ngens - 1
    families, excluded = [], []
    for p in candidates:
        q, dominant, by_degree = _leading_equation(ode, p)
        if len(by_degree) < 2:
            continue
        den = None
        for c in by_degree.values():
            den = c.denom if den is None else den.lcm(c.denom)
        G = ring.zero
        for d, c in by_degree.items():
            num = (c.numer * den.exquo(c.denom)).set_ring(ring)
            G += num * ring.gens[var] ** d
        fz = factor_limited(G)
        found = []
        for f in fz.factors:
            deg = f.poly.degree(var)
            if deg == 0 or f.poly == ring.gens[var]:
                continue
            if deg == 1:
                c1 = f.poly.coeff_wrt(var, 1)
                c0 = f.poly.coeff_wrt(var, 0)
                root = params.field.new(-c0.set_ring(params.ring)) / params.field.new(c1.set_ring(params.ring))
                found.append((root, f.multiplicity))
            else:
                excluded.append(ExcludedFamily(p, render_poly(f.poly), deg))
        for root, mult in sorted(found, key=lambda rm: render(rm[0])):
            families.append(PoleFamily(p, root, params, dominant, q, mult))
    return families, excluded


def leading_orders(ode: AutonomousODE) -> list[PoleFamily]:
    """Pole families ``u ~ u0 chi^p`` (p a negative integer, u0 rational in the parameters)."""
    return leading_order_analysis(ode)[0]


# ---------------------------------------------------------------------------
# Fuchs indices
# ---------------------------------------------------------------------------

def indicial_polynomial(family: PoleFamily, ode: AutonomousODE):
    """``P(j)``: coefficient of chi^(q+j) in E(u0 chi^p + eps chi^(p+j)) at first order in eps."""
    params = ode.params
    ring = PolyRing(["j"], params.field.to_domain(), grlex)
    j = ring.gens[0]
    p, u0 = family.p, params.convert(family.u0)
    total = ring.zero
    terms = dict(ode.terms())
    for mon in family.dominant_terms:
        c = terms[mon]
        d = sum(mon)
        base = c * u0 ** (d - 1)
        for k, e in enumerate(mon):
            base *= falling(p, k) ** e
        inner = ring.zero
        for k, e in enumerate(mon):
            if not e:
                continue
            shifted = ring.one
            for i in range(k):
                shifted *= j + (p - i)
            inner += shifted * rat(Fraction(e, falling(p, k)))
        total += inner * base
    return total


def fuchs_indices(family: PoleFamily, ode: AutonomousODE) -> IndicialData:
    """Indicial polynomial with its factorization; checks that -1 is a root."""
    P = indicial_polynomial(family, ode)
    if not P:
        raise DegenerateBalance(
            f"indicial polynomial vanishes identically for {family.render()} "
            f"(u0 is a root of multiplicity {family.multiplicity} of the leading equation)")
    params = ode.params
    if _eval_indicial(P, -1, params):
        raise InternalInconsistency(f"-1 is not a Fuchs index of {family.render()}")
    big = PolyRing(list(params.names) + ["j"], params.field.domain, grlex)
    den = None
    for c in P.coeffs():
        den = c.denom if den is None else den.lcm(c.denom)
    num = big.zero
    jv = big.gens[-1]
    for (e,), c in P.terms():
        num += (c.numer * den.exquo(c.denom)).set_ring(big) * jv ** e
    fz = factor_limited(num)
    var = big.ngens - 1
    roots, irreducible = [], []
    for f in fz.factors:
        deg = f.poly.degree(var)
        if deg == 0:
            continue
        if deg == 1 and all(not any(m[:-1]) for m in f.poly.monoms()):
            c1 = rat(f.poly.coeff_wrt(var, 1).LC)
            c0 = f.poly.coeff_wrt(var, 0)
            c0 = rat(c0.LC) if c0 else rat(0)
            r = -c0 / c1
            roots.append((Fraction(int(r.numerator), int(r.denominator)), f.multiplicity))
        else:
            irreducible.append(render_poly(f.poly))
    if den.is_ground:
        fz = Factorization(fz.content / rat(den.LC), fz.factors)
    return IndicialData(P, fz, tuple(sorted(roots)), tuple(irreducible))


# ---------------------------------------------------------------------------
# Laurent recursion
# ---------------------------------------------------------------------------

def resonance_names(indices: Sequence[int], tag: str = "") -> dict[int, str]:
    return {j: f"U{j}_{tag}" if tag else f"U{j}" for j in indices}


def laurent_expand(family: PoleFamily, ode: AutonomousODE, J: int,
                   names: Mapping[int, str] | None = None,
                   params: ParamField | None = None) -> LaurentFamily:
    """First ``J`` Laurent coefficients ``u_0 .. u_(J-1)`` of ``family``.

    At a positive integer Fuchs index ``j`` the recursion reads ``0 * u_j +
    R_j = 0``: when ``R_j`` vanishes a free symbol (default ``U<j>``) is
    introduced, otherwise :class:`LogarithmRequired` carries ``R_j``'s
    numerator. ``params`` may supply a field already containing the
    resonance symbols (it must extend ``ode.params``).
    """
    if J < 1:
        raise ValueError("J must be at least 1")
    ind = fuchs_indices(family, ode)
    positive = [j for j in ind.positive_integer_indices if j < J]
    names = dict(names) if names is not None else resonance_names(positive)
    if params is None:
        params = ode.params.extend([names[j] for j in positive], ORIGIN_RESONANCE)
    ode_f = ode.over(params) if params is not ode.params else ode
    P = ind.poly
    Pvals = [params.convert(_eval_indicial(P, j, ode.params)) for j in range(J)]
    coeffs = [params.convert(family.u0)]
    stream = CoefficientStream(family.p, coeffs, params.field)
    q = family.valuation
    terms = list(ode_f.terms())
    resonances = []
    for j in range(1, J):
        R = params.zero
        for mon, c in terms:
            v = stream.coeff(mon, q + j)
            if v:
                R += c * v
        if Pvals[j]:
            uj = -R / Pvals[j]
        else:
            if R:
                raise LogarithmRequired(j, primitive(R.numer), render(primitive(R.numer)))
            uj = params.gens[names[j]]
            resonances.append((j, names[j]))
        coeffs.append(uj)
        stream.settle(j)
    series = LaurentSeries(family.p, coeffs, family.p + J - 1, params.field)
    return LaurentFamily(family, series, params, resonances, ind)


def _eval_indicial(P, j: int, params: ParamField):
    val = params.zero
    for (e,), c in P.terms():
        val += c * j ** e
    return val


# ---------------------------------------------------------------------------
# residue sums
# ---------------------------------------------------------------------------

def residue_conditions(families: Sequence[LaurentFamily], r: int = 1) -> list[ResidueCondition]:
    """Summed chi^-1 coefficient of ``u^r`` over the families, as a polynomial condition."""
    if not families:
        return []
    params = families[0].params
    for lf in families[1:]:
        params = params.union(lf.params)
    total = params.zero
    for lf in families:
        s = lf.series
        if r == 1:
            total += params.convert(s.coeff(-1)) if s.offset <= -1 else params.zero
            continue
        power = s
        for _ in range(r - 1):
            power = power.mul(s, -1)
        if power.offset <= -1:
            total += params.convert(power.coeff(-1))
    expr = primitive(total.numer) if total else params.ring.zero
    return [ResidueCondition(expr, total, r)]
