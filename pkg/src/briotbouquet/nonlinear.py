"""Small polynomial systems: resultant elimination with rational root extraction.

Used for the constraint systems left after the linear solve (in a handful of
scale-invariant variables) and for the determining equations of closed-form
ansatze.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from itertools import combinations
from typing import Sequence

from .arith import factor_limited, gcd_many, primitive, rat, render_poly


@dataclass
class SystemSolution:
    """Rational points of a polynomial system plus whatever could not be split.

    ``points`` are dicts ``{variable name: rational}``; ``unresolved`` holds
    rendered polynomials (irreducible factors of degree >= 2, or
    positive-dimensional components) that the limited factoriser could not
    turn into points.
    """

    points: list[dict] = dc_field(default_factory=list)
    unresolved: list[str] = dc_field(default_factory=list)


def _clean(eqs):
    out, seen = [], set()
    for e in eqs:
        if not e:
            continue
        e = primitive(e)
        key = tuple(sorted(e.terms()))
        if key not in seen:
            seen.add(key)
            out.append(e)
    return out


def _vars_of(p) -> set[int]:
    used = set()
    for m in p.monoms():
        used.update(i for i, e in enumerate(m) if e)
    return used


def _rational_roots(p, var: int, unresolved: list) -> list:
    """Rational roots of a univariate polynomial (in generator ``var``)."""
    if p.is_ground:
        return []
    roots = []
    for f in factor_limited(p).factors:
        d = f.poly.degree(var)
        if d == 1:
            c1 = rat(f.poly.coeff_wrt(var, 1).LC)
            c0p = f.poly.coeff_wrt(var, 0)
            c0 = rat(c0p.LC) if c0p else rat(0)
            roots.append(-c0 / c1)
        elif d > 1:
            unresolved.append(render_poly(f.poly))
    return sorted(set(roots))


def solve_polynomial_system(eqs: Sequence, variables: Sequence[int] | None = None) -> SystemSolution:
    """All rational solutions of ``eqs = 0`` (polynomials over QQ sharing one ring).

    Variables are eliminated from the last one backwards by resultants; the
    final univariate eliminant is split with :func:`factor_limited` and the
    points are extended by back-substitution.
    """
    eqs = _clean(eqs)
    if not eqs:
        return SystemSolution([{}], [])
    ring = eqs[0].ring
    variables = list(range(ring.ngens)) if variables is None else list(variables)
    out = SystemSolution()
    _solve(eqs, variables, {}, out)
    names = [str(s) for s in ring.symbols]
    pts = []
    for pt in out.points:
        pts.append({names[i]: v for i, v in sorted(pt.items())})
    uniq = []
    for p in pts:
        if p not in uniq:
            uniq.append(p)
    uniq.sort(key=lambda d: tuple((k, v) for k, v in sorted(d.items())))
    out.points = uniq
    return out


def _solve(eqs, variables, partial, out: SystemSolution):
    eqs = _clean(eqs)
    for e in eqs:
        if e.is_ground:
            return
    if not eqs:
        if variables:
            out.unresolved.append(f"{len(variables)} variable(s) free at {_fmt_point(partial)}")
        else:
            out.points.append(dict(partial))
        return
    ring = eqs[0].ring
    active = [v for v in variables if any(v in _vars_of(e) for e in eqs)]
    free = [v for v in variables if v not in active]
    if free:
        out.unresolved.append("free " + ", ".join(str(ring.symbols[v]) for v in free)
                              + f" at {_fmt_point(partial, ring)}")
        return
    g = gcd_many(eqs)
    if g is not None and not g.is_ground:
        # common component: solutions of g = 0 plus those of the cofactors
        gv = _vars_of(g)
        if len(gv) == 1:
            (v,) = gv
            for r in _rational_roots(g, v, out.unresolved):
                _solve([_subst(e, v, r) for e in eqs], [w for w in variables if w != v],
                       {**partial, v: r}, out)
        else:
            out.unresolved.append(render_poly(g))
        eqs = [e.exquo(g) for e in eqs]
        _solve(eqs, variables, partial, out)
        return
    if len(active) == 1:
        (v,) = active
        uni = gcd_many(eqs)
        for r in _rational_roots(uni, v, out.unresolved):
            out.points.append({**partial, v: r})
        return
    v = active[-1]
    with_v = [e for e in eqs if v in _vars_of(e)]
    without = [e for e in eqs if v not in _vars_of(e)]
    eliminants = list(without)
    for a, b in combinations(with_v, 2):
        r = _resultant(a, b, v)
        if r:
            eliminants.append(r)
    eliminants = _clean(eliminants)
    if not eliminants:
        out.unresolved.append("positive-dimensional: " + "; ".join(render_poly(e) for e in eqs))
        return
    sub = SystemSolution()
    _solve(eliminants, [w for w in active if w != v], {}, sub)
    out.unresolved.extend(sub.unresolved)
    for pt in sub.points:
        reduced = list(eqs)
        for w, val in pt.items():
            reduced = [_subst(e, w, val) for e in reduced]
        _solve(reduced, [v], {**partial, **pt}, out)


def _fmt_point(partial, ring=None) -> str:
    if not partial:
        return "the generic point"
    name = (lambda i: str(ring.symbols[i])) if ring is not None else (lambda i: f"v{i}")
    return "{" + ", ".join(f"{name(i)}={v}" for i, v in sorted(partial.items())) + "}"


def _subst(p, var: int, value):
    """Replace generator ``var`` by a rational, staying in the same ring."""
    ring = p.ring
    out = {}
    for mon, c in p.terms():
        e = mon[var]
        nm = mon[:var] + (0,) + mon[var + 1:]
        out[nm] = out.get(nm, ring.domain.zero) + c * value ** e
    return ring.from_dict({m: c for m, c in out.items() if c})


def _resultant(a, b, var: int):
    """Resultant with respect to generator ``var`` (returned in the same ring)."""
    ring = a.ring
    order = [var] + [i for i in range(ring.ngens) if i != var]
    perm = ring.clone(symbols=[ring.symbols[i] for i in order])
    pa = perm.from_dict({tuple(m[i] for i in order): c for m, c in a.terms()})
    pb = perm.from_dict({tuple(m[i] for i in order): c for m, c in b.terms()})
    r = pa.resultant(pb)
    if not r:
        return ring.zero
    if r.ring.ngens == ring.ngens:
        return ring.from_dict({tuple(m[order.index(j)] for j in range(ring.ngens)): c
                               for m, c in r.terms()})
    rest = order[1:]
    out = {}
    for m, c in r.terms():
        full = [0] * ring.ngens
        for pos, j in enumerate(rest):
            full[j] = m[pos]
        out[tuple(full)] = c
    return ring.from_dict(out)
