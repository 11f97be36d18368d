"""Closed-form integration of subequations.

Three solution shapes are produced:

* :class:`EllipticForm`: a polynomial in Weierstrass ``wp`` and ``wp'``;
* :class:`TrigForm`: a rational function of ``tau = (k/2) tanh(k (xi - xi0)/2)``,
  which satisfies ``tau' = -tau^2 + k^2/4``;
* :class:`RationalForm`: a rational function of ``t = 1/(xi - xi0)``.

Ansatz coefficients are found by ordered elimination: equations are taken
from the most singular one down, each solved for one unknown when it is
linear with a known coefficient or univariate with rational roots.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyRing

from .arith import (ORIGIN_UNKNOWN, ParamField, factor_limited, render,
                    render_poly, roots_in_variable, substitute)
from .errors import NoClosedForm
from .ode import AutonomousODE


# ---------------------------------------------------------------------------
# differential algebras for the three charts
# ---------------------------------------------------------------------------

class WeierstrassAlgebra:
    """Polynomials in (wp, wp') modulo ``wp'^2 = 4 wp^3 - g2 wp - g3``, with d/dxi."""

    def __init__(self, params: ParamField, g2, g3):
        self.params = params
        self.ring = PolyRing(["wp", "wpp"], params.field.to_domain(), grlex)
        self.g2, self.g3 = params.convert(g2), params.convert(g3)
        wp, wpp = self.ring.gens
        self.cubic = wp ** 3 * 4 - wp * self.g2 - self.ring(self.g3)
        self.dwpp = wp ** 2 * 6 - self.ring(self.g2 / 2)
        self._cubic_pows = {0: self.ring.one}

    def _cubic_pow(self, e):
        if e not in self._cubic_pows:
            self._cubic_pows[e] = self._cubic_pow(e - 1) * self.cubic
        return self._cubic_pows[e]

    def reduce(self, p):
        if all(m[1] < 2 for m in p.monoms()):
            return p
        wp, wpp = self.ring.gens
        out = self.ring.zero
        for (i, j), c in p.terms():
            out += wp ** i * wpp ** (j % 2) * self._cubic_pow(j // 2) * c
        return out

    def d(self, p):
        wp, wpp = self.ring.gens
        return self.reduce(p.diff(wp) * wpp + p.diff(wpp) * self.dwpp)

    def split(self, p) -> tuple[dict, dict]:
        """``{i: coeff of wp^i}``, ``{i: coeff of wp' wp^i}``."""
        a, b = {}, {}
        for (i, j), c in self.reduce(p).terms():
            (b if j else a)[i] = c
        return a, b

    def apply(self, poly, u, order: int | None = None):
        """Evaluate a polynomial in u0..uN (ring over the same field) at ``u``."""
        n = poly.ring.ngens
        derivs = [u]
        for _ in range(n - 1):
            derivs.append(self.d(derivs[-1]))
        vals = [self.reduce(x) for x in derivs]
        out = self.ring.zero
        cache = {}
        for mon, c in poly.terms():
            t = self.ring(self.params.convert(c))
            for k, e in enumerate(mon):
                if e:
                    key = (k, e)
                    if key not in cache:
                        cache[key] = self.reduce(vals[k] ** e)
                    t = self.reduce(t * cache[key])
            out += t
        return self.reduce(out)


def riccati_derivative(p, k2, tau_index: int = 0):
    """d/dxi of a polynomial in tau (generator ``tau_index``), with tau' = -tau^2 + k2/4."""
    tau = p.ring.gens[tau_index]
    return p.diff(tau) * (p.ring(k2 / 4) - tau ** 2)


# ---------------------------------------------------------------------------
# solution types
# ---------------------------------------------------------------------------

@dataclass
class EllipticForm:
    """``u = sum wp_coeffs[i] wp^i + wp' * sum wpp_coeffs[i] wp^i``."""

    params: ParamField
    wp_coeffs: dict            # i -> FracElem
    wpp_coeffs: dict           # i -> FracElem
    g2: object
    g3: object
    substitution: dict = dc_field(default_factory=dict)
    constraints: list = dc_field(default_factory=list)

    kind = "elliptic"

    def algebra(self) -> WeierstrassAlgebra:
        return WeierstrassAlgebra(self.params, self.g2, self.g3)

    def as_poly(self, alg: WeierstrassAlgebra | None = None):
        alg = alg or self.algebra()
        wp, wpp = alg.ring.gens
        out = alg.ring.zero
        for i, c in self.wp_coeffs.items():
            out += wp ** i * alg.params.convert(c)
        for i, c in self.wpp_coeffs.items():
            out += wpp * wp ** i * alg.params.convert(c)
        return out

    def render(self) -> str:
        terms = []
        for i in sorted(self.wpp_coeffs, reverse=True):
            terms.append((self.wpp_coeffs[i], "wp'" + (f"*wp^{i}" if i > 1 else "*wp" if i == 1 else "")))
        for i in sorted(self.wp_coeffs, reverse=True):
            terms.append((self.wp_coeffs[i], f"wp^{i}" if i > 1 else "wp" if i == 1 else ""))
        body = _render_sum(terms)
        return f"u = {body}; g2 = {render(self.g2)}; g3 = {render(self.g3)}"

    def to_dict(self) -> dict:
        return {"type": "elliptic",
                "wp": {str(i): render(c) for i, c in sorted(self.wp_coeffs.items())},
                "wp_prime": {str(i): render(c) for i, c in sorted(self.wpp_coeffs.items())},
                "g2": render(self.g2), "g3": render(self.g3), "text": self.render()}


@dataclass
class TrigForm:
    """``u = N(tau)/D(tau)``, ``tau = (k/2) tanh(k (xi - xi0)/2)``."""

    params: ParamField
    numerator: object          # PolyElement in Q(params)[tau]
    denominator: object
    k2: object
    substitution: dict = dc_field(default_factory=dict)
    constraints: list = dc_field(default_factory=list)

    kind = "trigonometric"

    def render(self) -> str:
        return (f"u = {_render_ratio(self.numerator, self.denominator, 'tau')}; "
                f"tau = (k/2)*tanh(k*(xi - xi0)/2); k^2 = {render(self.k2)}")

    def to_dict(self) -> dict:
        return {"type": "trigonometric",
                "numerator": _coeff_list(self.numerator),
                "denominator": _coeff_list(self.denominator),
                "k2": render(self.k2), "text": self.render()}


@dataclass
class RationalForm:
    """``u = N(t)/D(t)``, ``t = 1/(xi - xi0)``."""

    params: ParamField
    numerator: object
    denominator: object
    substitution: dict = dc_field(default_factory=dict)
    constraints: list = dc_field(default_factory=list)

    kind = "rational"

    def render(self) -> str:
        return f"u = {_render_ratio(self.numerator, self.denominator, 't')}; t = 1/(xi - xi0)"

    def to_dict(self) -> dict:
        return {"type": "rational",
                "numerator": _coeff_list(self.numerator),
                "denominator": _coeff_list(self.denominator), "text": self.render()}


def _coeff_list(p) -> list[str]:
    """Rendered coefficients of a univariate polynomial, constant term first."""
    deg = p.degree() if p else 0
    return [render(_coeff(p, i)) for i in range(deg + 1)]


def _coeff(p, i):
    return p.get((i,), p.ring.domain.zero)


def _render_sum(terms) -> str:
    out = []
    for c, mon in terms:
        if not c:
            continue
        simple = len(c.numer.terms()) == 1
        neg = simple and c.numer.LC < 0
        cs = render(-c if neg else c)
        if mon:
            if not simple:
                cs = f"({cs})"
            body = mon if cs == "1" else f"{cs}*{mon}"
        else:
            body = cs if simple or not out else f"({cs})"
        if not out:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out) or "0"


def _render_univariate(p, var: str) -> str:
    if not p:
        return "0"
    terms = []
    for (i,), c in sorted(p.terms(), key=lambda t: -t[0][0]):
        terms.append((c, f"{var}^{i}" if i > 1 else var if i == 1 else ""))
    return _render_sum(terms)


def _render_ratio(num, den, var) -> str:
    ns = _render_univariate(num, var)
    if den == den.ring.one:
        return ns
    return f"({ns})/({_render_univariate(den, var)})"


# ---------------------------------------------------------------------------
# ordered elimination
# ---------------------------------------------------------------------------

@dataclass
class _Partial:
    field: ParamField
    values: dict               # unknown -> FracElem in ``field``
    eliminated: dict           # parameter -> FracElem in ``field``
    constraints: list          # rendered parameter conditions


def _unknowns_in(e, field: ParamField, unknowns) -> list[str]:
    used = set(field.free_symbols(e))
    return [u for u in unknowns if u in used]


def _move(partial: _Partial, new: ParamField, name: str, value) -> _Partial:
    vals = {k: substitute(v, partial.field, new, {name: value}) for k, v in partial.values.items()}
    elim = {k: substitute(v, partial.field, new, {name: value}) for k, v in partial.eliminated.items()}
    return vals, elim


def _specialize_parameter(field: ParamField, poly, unknowns):
    """Pick a parameter solving ``poly = 0`` linearly (nonzero-monomial coefficient preferred)."""
    best = None
    for i in range(len(field.names) - 1, -1, -1):
        name = field.names[i]
        if name in unknowns or poly.degree(i) != 1:
            continue
        c1 = poly.coeff_wrt(i, 1)
        c0 = poly.coeff_wrt(i, 0)
        value = -field.field.new(c0) / field.field.new(c1)
        if c1.is_ground or field.is_nonzero_monomial(c1):
            return name, value
        if best is None:
            best = (name, value)
    return best


def solve_ordered(equations: Sequence, field: ParamField, unknowns: Sequence[str],
                  nonzero: Sequence[str] = (), max_branches: int = 64) -> list[_Partial]:
    """Solve polynomial equations (FracElems of ``field``) for ``unknowns``.

    Equations are used in the given order. Equations without unknowns are
    parameter conditions; they are solved for a parameter (recorded in
    ``eliminated``). Unknowns listed in ``nonzero`` may not vanish.
    """
    out: list[_Partial] = []
    _solve_rec(list(equations), _Partial(field, {}, {}, []), list(unknowns), set(nonzero), out,
               max_branches)
    return out


def _solve_rec(eqs, partial: _Partial, unknowns, nonzero, out, limit):
    if len(out) >= limit:
        return
    field = partial.field
    eqs = [e for e in eqs if e]
    remaining = [u for u in unknowns if u not in partial.values]
    if not eqs:
        out.append(partial)
        return
    # the first actionable equation, most singular first
    for e in eqs:
        present = _unknowns_in(e, field, remaining)
        if not present:
            num = field.strip_nonzero_factors(e.numer)
            if num.is_ground:
                return
            for f in factor_limited(num).factors:
                choice = _specialize_parameter(field, f.poly, unknowns)
                if choice is None:
                    continue
                name, value = choice
                new = field.without([name])
                value = substitute(value, field, new)
                vals, elim = _move(partial, new, name, value)
                elim[name] = value
                nxt = _Partial(new, vals, elim, partial.constraints + [render_poly(f.poly) + " = 0"])
                _solve_rec([substitute(x, field, new, {name: value}) for x in eqs], nxt, unknowns,
                           nonzero, out, limit)
            return
        if len(present) == 1 and e.numer.degree(field.names.index(present[0])) > 1:
            x = present[0]
            roots, _unresolved = roots_in_variable(e.numer, field.names.index(x))
            for root, _mult in roots:
                value = field.convert(root)
                if x in nonzero and not value:
                    continue
                _assign(eqs, partial, x, value, unknowns, nonzero, out, limit)
            return
        for x in present:
            idx = field.names.index(x)
            num = e.numer
            if num.degree(idx) != 1:
                continue
            c1 = num.coeff_wrt(idx, 1)
            if _unknowns_in(field.field.new(c1), field, remaining):
                continue
            value = -field.field.new(num.coeff_wrt(idx, 0)) / field.field.new(c1)
            if x in nonzero and not value:
                return
            _assign(eqs, partial, x, value, unknowns, nonzero, out, limit)
            return
    # pairwise elimination to manufacture a univariate equation
    from .nonlinear import _resultant
    for i, a in enumerate(eqs):
        pa = _unknowns_in(a, field, remaining)
        for b in eqs[i + 1:]:
            pb = _unknowns_in(b, field, remaining)
            shared = [x for x in pa if x in pb]
            if not shared:
                continue
            x = shared[-1]
            r = _resultant(a.numer, b.numer, field.names.index(x))
            if r:
                _solve_rec([field.field.new(r)] + eqs, partial, unknowns, nonzero, out, limit)
                return


def _assign(eqs, partial, x, value, unknowns, nonzero, out, limit):
    field = partial.field
    new = field.without([x])
    value = substitute(value, field, new)
    vals, elim = _move(partial, new, x, value)
    vals[x] = value
    nxt = _Partial(new, vals, elim, partial.constraints)
    _solve_rec([substitute(e, field, new, {x: value}) for e in eqs], nxt, unknowns, nonzero, out,
               limit)


# ---------------------------------------------------------------------------
# genus 1: Weierstrass ansatz
# ---------------------------------------------------------------------------

def _fresh_names(params: ParamField):
    taken = set(params.names)

    def fresh(base: str) -> str:
        name = base
        while name in taken:
            name += "_"
        taken.add(name)
        return name
    return fresh


def _target_poly(target):
    if isinstance(target, AutonomousODE):
        return target.poly, target.params
    raise TypeError("target must be an AutonomousODE")


def integrate_genus1(target: AutonomousODE, pole_order: int) -> list[EllipticForm]:
    """Solutions ``u`` polynomial in (wp, wp') with a pole of order ``pole_order``.

    The ansatz has a wp^i term for every even order 2i <= pole_order and a
    wp' wp^i term for every odd order 2i+3 <= pole_order; wp and wp' are
    eliminated by the Weierstrass relations and the coefficients of the
    reduced expression are solved from the most singular one down.
    """
    poly, params = _target_poly(target)
    P = abs(pole_order)
    if P < 2:
        raise NoClosedForm("an elliptic function has no single simple pole per cell")
    wp_idx = list(range(P // 2, -1, -1))
    wpp_idx = list(range((P - 3) // 2, -1, -1)) if P >= 3 else []
    fresh = _fresh_names(params)
    cn = {i: fresh(f"c_{i}") for i in wp_idx}
    dn = {i: fresh(f"d_{i}") for i in wpp_idx}
    g2n, g3n = fresh("g2"), fresh("g3")
    names = list(cn.values()) + list(dn.values()) + [g2n, g3n]
    field = params.extend(names, ORIGIN_UNKNOWN)
    alg = WeierstrassAlgebra(field, field.gens[g2n], field.gens[g3n])
    wp, wpp = alg.ring.gens
    u = alg.ring.zero
    for i in wp_idx:
        u += wp ** i * field.gens[cn[i]]
    for i in wpp_idx:
        u += wpp * wp ** i * field.gens[dn[i]]
    E = AutonomousODE(target.over(field).poly, field).poly
    red = alg.apply(E, u)
    a, b = alg.split(red)
    eqs = [(2 * i, c) for i, c in a.items()] + [(2 * i + 3, c) for i, c in b.items()]
    eqs.sort(key=lambda t: -t[0])
    lead = dn[wpp_idx[0]] if P % 2 else cn[wp_idx[0]]
    unknowns = [lead] + [n for n in names if n != lead]
    sols = solve_ordered([c for _, c in eqs], field, unknowns, nonzero=[lead])
    forms = []
    for s in sols:
        fld = s.field
        vals = s.values
        wpc = {i: vals[cn[i]] for i in wp_idx if cn[i] in vals}
        wppc = {i: vals[dn[i]] for i in wpp_idx if dn[i] in vals}
        free = [n for n in names if n not in vals]
        if free:
            continue
        forms.append(EllipticForm(fld, {i: c for i, c in wpc.items() if c},
                                  {i: c for i, c in wppc.items() if c},
                                  vals[g2n], vals[g3n], dict(s.eliminated), list(s.constraints)))
    if not forms:
        raise NoClosedForm(f"no polynomial in (wp, wp') with a pole of order {P} solves "
                           f"{target.render()}", [render(c) for _, c in eqs])
    return forms


# ---------------------------------------------------------------------------
# degeneration of elliptic solutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Degeneracy:
    kind: str                   # "elliptic", "trigonometric" or "rational"
    d: object = None            # g2 = 3 d^2, g3 = -d^3 when trigonometric


def degenerate_check(g2, g3, params: ParamField | None = None) -> Degeneracy:
    """Classify (g2, g3) by the discriminant ``g2^3 - 27 g3^2``."""
    disc = g2 ** 3 - g3 ** 2 * 27
    if disc:
        return Degeneracy("elliptic")
    if not g2 and not g3:
        return Degeneracy("rational")
    return Degeneracy("trigonometric", -g3 * 3 / g2)


def elliptic_to_trig(form: EllipticForm) -> TrigForm | RationalForm:
    """Rewrite a degenerate elliptic form: wp = tau^2 - k^2/6, wp' = 2 tau (k^2/4 - tau^2)."""
    deg = degenerate_check(form.g2, form.g3)
    fld = form.params
    ring = PolyRing(["tau"], fld.field.to_domain(), grlex)
    tau = ring.gens[0]
    if deg.kind == "elliptic":
        raise ValueError("the discriminant does not vanish")
    if deg.kind == "rational":
        wp_v, wpp_v, k2 = tau ** 2, tau ** 3 * -2, fld.zero
    else:
        k2 = deg.d * 6
        wp_v = tau ** 2 - ring(k2 / 6)
        wpp_v = tau * 2 * (ring(k2 / 4) - tau ** 2)
    num = ring.zero
    for i, c in form.wp_coeffs.items():
        num += wp_v ** i * c
    for i, c in form.wpp_coeffs.items():
        num += wpp_v * wp_v ** i * c
    if deg.kind == "rational":
        rr = PolyRing(["t"], fld.field.to_domain(), grlex)
        return RationalForm(fld, rr.from_dict(dict(num.terms())), rr.one,
                            dict(form.substitution), list(form.constraints))
    return TrigForm(fld, num, ring.one, k2, dict(form.substitution), list(form.constraints))


def degenerate_branches(form: EllipticForm, exclude: Sequence[str] = ()) -> list:
    """Parameter loci where the discriminant vanishes, with the resulting forms.

    Returns ``[(name, value, field, form)]``: parameter ``name`` eliminated
    as ``value`` makes ``g2^3 - 27 g3^2`` vanish and ``form`` is the
    trigonometric (or rational) solution there.
    """
    fld = form.params
    disc = form.g2 ** 3 - form.g3 ** 2 * 27
    if not disc:
        return []
    num = fld.strip_nonzero_factors(disc.numer)
    if num.is_ground:
        return []
    out = []
    for f in factor_limited(num).factors:
        choice = _specialize_parameter(fld, f.poly, exclude)
        if choice is None:
            continue
        name, value = choice
        new = fld.without([name])
        value = substitute(value, fld, new)
        sub = {name: value}
        ell = EllipticForm(new, {i: substitute(c, fld, new, sub) for i, c in form.wp_coeffs.items()},
                           {i: substitute(c, fld, new, sub) for i, c in form.wpp_coeffs.items()},
                           substitute(form.g2, fld, new, sub), substitute(form.g3, fld, new, sub),
                           {**{k: substitute(v, fld, new, sub) for k, v in form.substitution.items()},
                            name: value},
                           form.constraints + [render_poly(f.poly) + " = 0"])
        out.append((name, value, new, elliptic_to_trig(ell)))
    return out


# ---------------------------------------------------------------------------
# genus 0: rational-in-tau ansatz
# ---------------------------------------------------------------------------

def integrate_genus0(subeq: AutonomousODE, bounds: tuple[int, int]) -> list:
    """Solutions ``u = N(tau)/D(tau)`` (deg N <= bounds[0], D monic of degree bounds[1]).

    ``subeq`` must be first order. ``k^2 = 0`` solutions come back as
    :class:`RationalForm` in ``t = 1/(xi - xi0)``.
    """
    if subeq.order != 1:
        raise ValueError("integrate_genus0 expects a first-order subequation")
    nb, db = bounds
    params = subeq.params
    fresh = _fresh_names(params)
    nn = {i: fresh(f"n_{i}") for i in range(nb, -1, -1)}
    en = {i: fresh(f"e_{i}") for i in range(db - 1, -1, -1)}
    k2n = fresh("k2")
    names = list(nn.values()) + list(en.values()) + [k2n]
    field = params.extend(names, ORIGIN_UNKNOWN)
    ring = PolyRing(["tau"], field.field.to_domain(), grlex)
    tau = ring.gens[0]
    N = ring.zero
    for i in range(nb + 1):
        N += tau ** i * field.gens[nn[i]]
    D = tau ** db
    for i in range(db):
        D += tau ** i * field.gens[en[i]]
    k2 = field.gens[k2n]
    taup = -tau ** 2 + ring(k2 / 4)
    W = (N.diff(tau) * D - N * D.diff(tau)) * taup      # u' = W / D^2
    m = max(mon[1] for mon in subeq.poly.monoms())
    total = ring.zero
    Npow, Dpow, Wpow = {0: ring.one}, {0: ring.one}, {0: ring.one}

    def pw(cache, base, e):
        if e not in cache:
            cache[e] = pw(cache, base, e - 1) * base
        return cache[e]

    for (j, k), c in subeq.over(field).poly.terms():
        e = 2 * m - j - 2 * k
        if e < 0:
            raise NoClosedForm("subequation is not of Briot-Bouquet shape")
        total += pw(Npow, N, j) * pw(Dpow, D, e) * pw(Wpow, W, k) * c
    eqs = sorted(total.terms(), key=lambda t: -t[0][0])
    lead = nn[nb]
    unknowns = [lead] + [n for n in names if n != lead]
    sols = solve_ordered([c for _, c in eqs], field, unknowns, nonzero=[lead])
    forms = []
    for s in sols:
        if any(n not in s.values for n in names):
            continue
        fld = s.field
        r1 = PolyRing(["tau"], fld.field.to_domain(), grlex)
        t1 = r1.gens[0]
        num = r1.zero
        for i in range(nb + 1):
            num += t1 ** i * s.values[nn[i]]
        den = t1 ** db
        for i in range(db):
            den += t1 ** i * s.values[en[i]]
        g = num.gcd(den)
        if not g.is_ground:
            continue          # common factor: really a lower-degree solution
        kv = s.values[k2n]
        if not kv:
            rr = PolyRing(["t"], fld.field.to_domain(), grlex)
            forms.append(RationalForm(fld, rr.from_dict(dict(num.terms())), rr.from_dict(dict(den.terms())),
                                      dict(s.eliminated), list(s.constraints)))
        else:
            forms.append(TrigForm(fld, num, den, kv, dict(s.eliminated), list(s.constraints)))
    if not forms:
        raise NoClosedForm(f"no rational-in-tau solution with bounds {bounds}",
                           [render(c) for _, c in eqs])
    return forms
