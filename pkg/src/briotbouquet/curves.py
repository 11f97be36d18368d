"""Plane algebraic curves ``F(u, v) = 0``: singular points, delta invariants, genus.

Singular points are located by resultants and split over the rationals or a
quadratic field ``Q(sqrt(D))``; each one's delta invariant is obtained by
repeated blowing up (sum of ``m(m-1)/2`` over infinitely near points), which
requires every tangent direction met on the way to lie in the working field.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Mapping

from sympy import sqrt as sym_sqrt
from sympy.ntheory import factorint
from sympy.polys.domains import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyRing

from .arith import ParamField, rat, render_poly, substitute
from .errors import InternalInconsistency, IrrationalSingularLocus, UnsupportedSingularity

CURVE_RING = PolyRing(["u", "v"], QQ, grlex)


# ---------------------------------------------------------------------------
# curve type
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlaneCurve:
    """``F(u, v) = 0`` with rational coefficients (``v`` stands for ``u'``)."""

    poly: object

    def __post_init__(self):
        if not self.poly:
            raise ValueError("the zero polynomial does not define a curve")

    @classmethod
    def from_subeq(cls, subeq, values: Mapping[str, object] | None = None) -> "PlaneCurve":
        """Curve of a first-order subequation, parameters replaced by rationals."""
        values = dict(values or {})
        params = subeq.params
        empty = ParamField()
        out = {}
        for mon, c in subeq.poly.terms():
            val = substitute(c, params, empty, {k: v for k, v in values.items() if k in params.names})
            out[(mon[0], mon[1] if len(mon) > 1 else 0)] = QQ(rat(val.numer.LC)) / QQ(rat(val.denom.LC)) \
                if val else QQ(0)
        poly = CURVE_RING.from_dict({m: c for m, c in out.items() if c})
        return cls(poly)

    @classmethod
    def parse(cls, text: str) -> "PlaneCurve":
        from .ode import parse_u_poly
        p = parse_u_poly(text.replace("u'", "u1").replace("v", "u1").replace("u1u1", "u1"),
                         ParamField(), 1)
        return cls(CURVE_RING.from_dict({(m[0], m[1]): QQ(rat(c.numer.LC)) / QQ(rat(c.denom.LC))
                                         for m, c in p.terms()}))

    @property
    def degree(self) -> int:
        return max(sum(m) for m in self.poly.monoms())

    @property
    def degrees(self) -> tuple[int, int]:
        return self.poly.degree(0), self.poly.degree(1)

    def render(self) -> str:
        return render_poly(self.poly)


@dataclass(frozen=True)
class SingularPoint:
    coordinates: str                 # e.g. "(0, 270/361)" or "[1 : 0 : 0]"
    field: str                       # "Q" or "Q(sqrt(D))"
    multiplicity: int
    delta: int
    count: int = 1                   # 2 for a pair of conjugate points
    at_infinity: bool = False


@dataclass
class GenusReport:
    genus: int
    degree: int
    singular_points: list = dc_field(default_factory=list)

    @property
    def delta_total(self) -> int:
        return sum(p.delta * p.count for p in self.singular_points)


# ---------------------------------------------------------------------------
# number fields
# ---------------------------------------------------------------------------

def _squarefree_part(n: int) -> tuple[int, int]:
    """``n = s^2 * D`` with ``D`` squarefree; returns ``(s, D)``."""
    sign = -1 if n < 0 else 1
    s, D = 1, sign
    for p, e in factorint(abs(n)).items():
        s *= p ** (e // 2)
        if e % 2:
            D *= p
    return s, D


class _Field:
    """QQ or Q(sqrt(D)), with helpers to move polynomials in."""

    def __init__(self, D: int | None = None):
        self.D = D
        if D is None:
            self.K = QQ
            self.root = None
        else:
            self.K = QQ.algebraic_field(sym_sqrt(D))
            self.root = self.K.from_sympy(sym_sqrt(D))

    @property
    def name(self) -> str:
        return "Q" if self.D is None else f"Q(sqrt({self.D}))"

    def ring(self, names):
        return PolyRing(list(names), self.K, grlex)

    def num(self, q):
        return self.K.convert(QQ(q)) if self.D is not None else QQ(q)

    def text(self, a) -> str:
        if self.D is None:
            q = rat(a)
            return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
        return str(self.K.to_sympy(a))


def _quadratic_roots(a, b, c):
    """Roots of ``a t^2 + b t + c`` (rationals) as (field, root1, root2)."""
    a, b, c = Fraction(str(rat(a))), Fraction(str(rat(b))), Fraction(str(rat(c)))
    disc = b * b - 4 * a * c
    n = disc.numerator * disc.denominator
    s, D = _squarefree_part(n)
    if D == 1:
        r = Fraction(s, disc.denominator)
        return None, (-b + r) / (2 * a), (-b - r) / (2 * a)
    fld = _Field(D)
    scale = Fraction(s, disc.denominator)
    base = fld.num(QQ(-b.numerator, b.denominator) / (2 * QQ(a.numerator, a.denominator)))
    off = fld.root * fld.num(QQ(scale.numerator, scale.denominator) / (2 * QQ(a.numerator, a.denominator)))
    return fld, base + off, base - off


def _lift(p, fld: _Field, ring):
    """Move a QQ polynomial into ``ring`` (over fld)."""
    return ring.from_dict({m: fld.num(c) for m, c in p.terms()})


def _univariate(p, var: int, value, fld: _Field, ring1):
    """``p`` with generator ``var`` set to ``value`` (in fld), as a univariate poly over fld."""
    other = 1 - var
    out = {}
    for m, c in p.terms():
        t = fld.num(c) * value ** m[var]
        key = (m[other],)
        out[key] = out.get(key, fld.K.zero) + t
    return ring1.from_dict({k: c for k, c in out.items() if c})


# ---------------------------------------------------------------------------
# delta invariant by blowing up
# ---------------------------------------------------------------------------

def _order(f) -> int:
    return min(sum(m) for m in f.monoms())


def _shift(f, a, b, ring):
    """``f(x + a, y + b)``."""
    x, y = ring.gens
    out = ring.zero
    X, Y = x + a, y + b
    pows_x, pows_y = {0: ring.one}, {0: ring.one}
    for (i, j), c in f.terms():
        if i not in pows_x:
            pows_x[i] = X ** i
        if j not in pows_y:
            pows_y[j] = Y ** j
        out += pows_x[i] * pows_y[j] * c
    return out


def _blow_up(f, m, t, ring, vertical=False):
    """Strict transform in the chart ``y = x (t + y1)`` (or ``x = y x1`` when vertical)."""
    x, y = ring.gens
    out = ring.zero
    if not vertical:
        base = y + t
        for (i, j), c in f.terms():
            out += x ** (i + j - m) * base ** j * c
    else:
        for (i, j), c in f.terms():
            out += x ** i * y ** (i + j - m) * c
    return out


def _at_origin(g):
    return g.get((0, 0), g.ring.domain.zero)


def delta_invariant(f, ring, depth: int = 0) -> tuple[int, int]:
    """``(multiplicity, delta)`` of ``f = 0`` at the origin of ``ring``'s plane."""
    m = _order(f)
    if m <= 1:
        return m, 0
    if depth > 40:
        raise UnsupportedSingularity("blow-up recursion did not terminate")
    delta = m * (m - 1) // 2
    cone = ring.from_dict({mon: c for mon, c in f.terms() if sum(mon) == m})
    _, factors = cone.factor_list()
    for h, r in factors:
        deg = max(sum(mon) for mon in h.monoms())
        if deg == 0 or r == 1:
            # simple tangents: the strict transform is smooth where it meets the exceptional line
            continue
        if deg > 1:
            raise UnsupportedSingularity(
                "repeated tangent direction not defined over the working field")
        a = h.get((1, 0), ring.domain.zero)
        b = h.get((0, 1), ring.domain.zero)
        g = _blow_up(f, m, -a / b, ring) if b else _blow_up(f, m, None, ring, vertical=True)
        if _at_origin(g):
            raise InternalInconsistency("strict transform misses the infinitely near point")
        delta += delta_invariant(g, ring, depth + 1)[1]
    return m, delta


# ---------------------------------------------------------------------------
# singular points and genus
# ---------------------------------------------------------------------------

def _point(fld: _Field, f_shifted, ring, coords: str, count: int, at_inf: bool):
    m, d = delta_invariant(f_shifted, ring)
    if m < 2:
        return None
    return SingularPoint(coords, fld.name, m, d, count, at_inf)


def _roots_over(p1, fld: _Field):
    """Roots of a univariate polynomial over ``fld``: ``[(field, root, count)]``.

    A quadratic factor over Q contributes one root in Q(sqrt(D)) with count 2.
    """
    out = []
    if p1.is_ground:
        return out
    _, factors = p1.factor_list()
    for h, _mult in factors:
        deg = h.degree()
        if deg == 1:
            out.append((fld, -h.coeff_wrt(0, 0).LC / h.LC if h.coeff_wrt(0, 0) else fld.K.zero, 1))
        elif deg == 2 and fld.D is None:
            a = h.LC
            b = h.get((1,), QQ(0))
            c = h.get((0,), QQ(0))
            nf, r1, _ = _quadratic_roots(a, b, c)
            if nf is None:
                raise InternalInconsistency("rational quadratic left unsplit")
            out.append((nf, r1, 2))
        else:
            raise IrrationalSingularLocus(
                f"singular points need a field beyond {fld.name} (factor of degree {deg})")
    return out


def _affine_points(F) -> list:
    from .nonlinear import _resultant
    Fu, Fv = F.diff(F.ring.gens[0]), F.diff(F.ring.gens[1])
    r1 = _resultant(F, Fv, 1) if Fv else F.ring.zero
    r2 = _resultant(F, Fu, 1) if Fu else F.ring.zero
    if r1 and r2:
        g = r1.gcd(r2)
    else:
        g = r1 or r2
    if not g or g.is_ground:
        return []
    R1 = PolyRing(["t"], QQ, grlex)
    gu = R1.from_dict({(m[0],): c for m, c in g.terms()})
    pts = []
    for fld, u0, cnt in _roots_over(gu, _Field()):
        ring1 = fld.ring(["t"])
        G = _univariate(F, 0, u0, fld, ring1)
        for part in (_univariate(Fu, 0, u0, fld, ring1), _univariate(Fv, 0, u0, fld, ring1)):
            G = G.gcd(part) if part else G
        for fld2, v0, cnt2 in _roots_over(G, fld):
            ring2 = fld2.ring(["x", "y"])
            U0 = fld2.K.convert(u0, fld.K) if fld2 is not fld else u0
            f = _shift(_lift(F, fld2, ring2), U0, v0, ring2)
            pt = _point(fld2, f, ring2, f"({fld2.text(U0)}, {fld2.text(v0)})", cnt * cnt2, False)
            if pt:
                pts.append(pt)
    return pts


def _infinite_points(F, d: int) -> list:
    top = F.ring.from_dict({m: c for m, c in F.terms() if sum(m) == d})
    _, factors = top.factor_list()
    pts = []
    for h, mult in factors:
        if mult < 2:
            continue
        deg = max(sum(m) for m in h.monoms())
        if deg == 1:
            a = h.get((1, 0), QQ(0))
            b = h.get((0, 1), QQ(0))
            dirs = [(_Field(), QQ(b), QQ(-a), 1)]
        elif deg == 2:
            a = h.get((2, 0), QQ(0))
            b = h.get((1, 1), QQ(0))
            c = h.get((0, 2), QQ(0))
            nf, t1, _ = _quadratic_roots(c, b, a)   # t = v/u
            dirs = [(nf, nf.num(1), t1, 2)]
        else:
            raise IrrationalSingularLocus(f"points at infinity need a field of degree {deg}")
        for fld, pu, pv, cnt in dirs:
            ring2 = fld.ring(["x", "z"])
            if pu:
                # chart u = 1: coordinates (v, z)
                chart = ring2.from_dict({(j, d - i - j): fld.num(cf) for (i, j), cf in F.terms()})
                f = _shift(chart, pv / pu, fld.K.zero, ring2)
                coords = f"[1 : {fld.text(pv / pu)} : 0]"
            else:
                chart = ring2.from_dict({(i, d - i - j): fld.num(cf) for (i, j), cf in F.terms()})
                f = chart
                coords = "[0 : 1 : 0]"
            pt = _point(fld, f, ring2, coords, cnt, True)
            if pt:
                pts.append(pt)
    return pts


def genus_report(curve: PlaneCurve) -> GenusReport:
    """Genus ``(d-1)(d-2)/2 - sum(delta)`` with the singular points found."""
    F = curve.poly
    if F.ring is not CURVE_RING:
        F = CURVE_RING.from_dict(dict(F.terms()))
    _, factors = F.factor_list()
    if len([f for f, _ in factors if not f.is_ground]) != 1 or factors[0][1] != 1:
        raise ValueError(f"curve {curve.render()} is not irreducible and reduced over Q")
    d = curve.degree
    if d <= 2:
        return GenusReport(0, d, [])
    if F.degree(1) == 0 or F.degree(0) == 0:
        raise ValueError("an irreducible curve in one variable of degree > 1 is not absolutely irreducible")
    pts = _affine_points(F) + _infinite_points(F, d)
    g = (d - 1) * (d - 2) // 2 - sum(p.delta * p.count for p in pts)
    if g < 0:
        raise UnsupportedSingularity(
            f"negative genus {g}: the curve is not absolutely irreducible")
    return GenusReport(g, d, pts)


def genus(curve: PlaneCurve) -> int:
    return genus_report(curve).genus


# ---------------------------------------------------------------------------
# homographies
# ---------------------------------------------------------------------------

def homography(poly, alpha, beta, gamma, delta_, m: int | None = None):
    """Transform ``F(u, u')`` under ``u = (alpha U + beta)/(gamma U + delta_)``.

    ``poly`` lives in a two-generator ring (u, u'); the result, in the same
    ring, is ``(gamma U + delta_)^(2m) F(...)`` with ``m`` the degree in u'.
    """
    ring = poly.ring
    U, V = ring.gens
    det = alpha * delta_ - beta * gamma
    if not det:
        raise ValueError("degenerate homography")
    m = poly.degree(1) if m is None else m
    num, den = U * alpha + beta, U * gamma + delta_
    out = ring.zero
    for (j, k), c in poly.terms():
        e = 2 * m - j - 2 * k
        if e < 0:
            raise ValueError(f"monomial u^{j} u'^{k} violates the Briot-Bouquet bound for m={m}")
        out += num ** j * den ** e * (V * det) ** k * c
    return out


def is_briot_bouquet_shape(poly, m: int | None = None) -> bool:
    m = poly.degree(1) if m is None else m
    return all(j <= 2 * m - 2 * k for j, k in poly.monoms())
