"""First-order Briot–Bouquet subequations from Laurent series.

The unknown subequation ``F(u, u') = sum a_{j,k} u^j u'^k`` (``a_{0,m} = 1``)
is required to vanish on every enforced Laurent series. Each coefficient of
the resulting expansion is linear in the ``a_{j,k}``; a maximal-rank square
subsystem is solved exactly, the remaining rows become polynomial conditions
on the equation parameters, and those conditions are split into branches.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from typing import Mapping, Sequence

from sympy.polys.domains import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyRing

from .arith import (ParamField, bareiss_solve, factor_limited, gcd_many, primitive,
                    rat, render, render_poly, substitute)
from .errors import (DivisionByZeroDenominator, InternalInconsistency, OdeSyntaxError,
                     TruncationTooShort, UnresolvedConstraints)
from .nonlinear import solve_polynomial_system
from .ode import AutonomousODE, parse_expression, u_ring
from .series import CoefficientStream
from .singular import LaurentFamily, PoleFamily


# ---------------------------------------------------------------------------
# template
# ---------------------------------------------------------------------------

def elliptic_order(families: Sequence) -> tuple[int, int]:
    """Elliptic orders ``(m, n)`` of ``u`` and ``u'`` from the enforced pole families."""
    ps = [abs(_family(f).p) for f in families]
    return sum(ps), sum(p + 1 for p in ps)


def _family(f) -> PoleFamily:
    return f.family if isinstance(f, LaurentFamily) else f


def coefficient_name(j: int, k: int) -> str:
    return f"a_{j}_{k}"


@dataclass(frozen=True)
class SubeqTemplate:
    """Monomials ``u^j u'^k`` allowed in the subequation.

    Besides the Briot–Bouquet bound ``j <= 2m - 2k`` a monomial is kept only
    if its pole order at every enforced family does not exceed that of
    ``u'^m``; other monomials would dominate the expansion and are forced to
    vanish anyway.
    """

    m: int
    pole_orders: tuple
    monomials: tuple                 # ((j, k), ...) in row-rendering order, includes (0, m)

    @classmethod
    def for_families(cls, families: Sequence) -> "SubeqTemplate":
        m, _ = elliptic_order(families)
        orders = tuple(abs(_family(f).p) for f in families)
        mons = []
        for k in range(m, -1, -1):
            for j in range(0, 2 * m - 2 * k + 1):
                if all(j * P + k * (P + 1) <= m * (P + 1) for P in orders):
                    mons.append((j, k))
        return cls(m, orders, tuple(mons))

    @property
    def leading(self) -> tuple[int, int]:
        return (0, self.m)

    @property
    def unknowns(self) -> tuple:
        return tuple(jk for jk in self.monomials if jk != self.leading)

    def is_briot_bouquet(self) -> bool:
        return all(j <= 2 * self.m - 2 * k for j, k in self.monomials)


# ---------------------------------------------------------------------------
# linear system
# ---------------------------------------------------------------------------

@dataclass
class Row:
    family: int
    j: int
    coeffs: dict                     # (j, k) -> FracElem, includes the leading column

    def render(self) -> str:
        return render_linear(self.coeffs)


def render_linear(coeffs: Mapping) -> str:
    parts = []
    for jk in sorted(coeffs, key=lambda t: (-t[1], t[0])):
        c = coeffs[jk]
        if not c:
            continue
        name = coefficient_name(*jk)
        simple = len(c.numer.terms()) == 1
        neg = simple and c.numer.LC < 0
        cs = render(-c if neg else c)
        if not simple:
            cs = f"({cs})"
        body = name if cs == "1" else f"{cs}*{name}"
        if not parts:
            parts.append(f"-{body}" if neg else body)
        else:
            parts.append(f" - {body}" if neg else f" + {body}")
    return "".join(parts) or "0"


@dataclass
class LinearSystem:
    """Rows ``F_j`` (coefficient of chi^(m(p-1)+j)) for every enforced family."""

    template: SubeqTemplate
    params: ParamField
    rows: list
    J: int
    families: list

    def matrix(self, indices: Sequence[int] | None = None):
        idx = range(len(self.rows)) if indices is None else indices
        unk = self.template.unknowns
        lead = self.template.leading
        zero = self.params.zero
        A = [[self.rows[i].coeffs.get(u, zero) for u in unk] for i in idx]
        rhs = [-self.rows[i].coeffs.get(lead, zero) for i in idx]
        return A, rhs

    def rows_of_family(self, fam: int) -> list:
        return [r for r in self.rows if r.family == fam]


def expansion_rows(template: SubeqTemplate, lf: LaurentFamily, params: ParamField,
                   count: int | None = None, coeffs: Mapping | None = None) -> list[dict]:
    """Per-row coefficient dicts of F on one Laurent series (rows 0 .. count-1).

    With ``coeffs`` given (values of the a_{j,k}), each row is instead the
    scalar value of F_j.
    """
    series = lf.series
    P = lf.family.p
    m = template.m
    base = m * (P - 1)
    avail = len(series.coeffs)
    count = avail if count is None else count
    if count > avail:
        raise TruncationTooShort(
            f"{count} rows requested but the series has only {avail} coefficients")
    field = params.field
    cs = [params.convert(c) for c in series.coeffs[:count]]
    stream = CoefficientStream(P, cs, field)
    out = []
    for i in range(count):
        row = {}
        for j, k in template.monomials:
            v = stream.coeff((j, k), base + i)
            if v:
                row[(j, k)] = v
        out.append(row)
    if coeffs is None:
        return out
    vals = []
    for row in out:
        s = params.zero
        for jk, v in row.items():
            a = coeffs.get(jk)
            if a:
                s += a * v
        vals.append(s)
    return vals


def assemble_system(template: SubeqTemplate, families: Sequence[LaurentFamily],
                    J: int | None = None) -> LinearSystem:
    """All rows ``F_j``, ``j < J``, of every enforced family."""
    params = families[0].params
    for lf in families[1:]:
        params = params.union(lf.params)
    if J is None:
        J = min(len(lf.series.coeffs) for lf in families)
    rows = []
    for fi, lf in enumerate(families):
        for j, coeffs in enumerate(expansion_rows(template, lf, params, J)):
            rows.append(Row(fi, j, coeffs))
    rows.sort(key=lambda r: (r.j, r.family))
    return LinearSystem(template, params, rows, J, list(families))


# ---------------------------------------------------------------------------
# generic rank by random rational specialization
# ---------------------------------------------------------------------------

class _Specializer:
    """Evaluate rational functions at a fixed random rational point."""

    def __init__(self, params: ParamField, seed: int):
        rng = random.Random(seed)
        self.params = params
        self.point = [QQ(rng.randint(1, 997) * rng.choice((1, -1)), rng.randint(1, 97))
                      for _ in params.names]

    def __call__(self, x):
        num = x.numer.evaluate(list(zip(x.numer.ring.gens, self.point))) if self.point else x.numer.LC
        den = x.denom.evaluate(list(zip(x.denom.ring.gens, self.point))) if self.point else x.denom.LC
        if not den:
            raise DivisionByZeroDenominator("random point hits a denominator")
        return QQ(num) / QQ(den)


def _eval_at(specializer, x):
    if not x:
        return QQ(0)
    if not specializer.params.names:
        return QQ(x.numer.LC) / QQ(x.denom.LC)
    return specializer(x)


def select_rows(system: LinearSystem, seed: int = 0) -> list[int]:
    """Rows (by increasing j) that raise the generic rank, until full column rank."""
    n = len(system.template.unknowns)
    A, _ = system.matrix()
    for attempt in range(8):
        spec = _Specializer(system.params, seed + attempt)
        try:
            numeric = [[_eval_at(spec, x) for x in row] for row in A]
            break
        except DivisionByZeroDenominator:
            continue
    else:
        raise InternalInconsistency("could not find a regular random specialization")
    pivots: dict[int, list] = {}
    chosen = []
    for i, vec in enumerate(numeric):
        v = list(vec)
        for col, prow in sorted(pivots.items()):
            if v[col]:
                f = v[col] / prow[col]
                v = [a - f * b for a, b in zip(v, prow)]
        lead = next((c for c, a in enumerate(v) if a), None)
        if lead is None:
            continue
        pivots[lead] = v
        chosen.append(i)
        if len(chosen) == n:
            break
    return chosen


# ---------------------------------------------------------------------------
# scaled parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Scaling:
    """A scale-invariant combination, e.g. ``x = b^2/(mu*nu)``."""

    name: str
    text: str
    expr: object                     # FracElem over params (+ ``k`` when used)
    params: ParamField

    @property
    def uses_k(self) -> bool:
        return "k" in self.params.free_symbols(self.expr) if "k" in self.params.names else False

    def is_monomial_ratio(self) -> bool:
        return (not self.uses_k and len(self.expr.numer.terms()) == 1
                and len(self.expr.denom.terms()) == 1)


def parse_scalings(text: str, params: ParamField) -> list[Scaling]:
    """``"x = b^2/(mu*nu), y = nu*A/mu^3"`` -> scalings (``k`` allowed for reporting)."""
    out = []
    if not text or not text.strip():
        return out
    ext = params.extend(["k"]) if "k" not in params.names else params
    for item in _split_top(text):
        if "=" not in item:
            raise OdeSyntaxError("scaling entries must look like name = expression", text, text.find(item))
        name, _, rhs = item.partition("=")
        name = name.strip()
        if not name.isidentifier() or name in ext.names:
            raise OdeSyntaxError(f"bad scaling name {name!r}", text, text.find(item))
        expr = parse_expression(rhs.strip(), ext)
        uses_k = "k" in ext.free_symbols(expr)
        field = ext if uses_k else params
        out.append(Scaling(name, rhs.strip(), field.convert(expr) if not uses_k else expr, field))
    return out


def _split_top(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in ",;" and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        parts.append("".join(cur).strip())
    return [p for p in parts if p]


class _ScaledRewriter:
    """Rewrite parameter polynomials in scaled variables and collect coefficients.

    For a scaling ``x = c N / D`` one numerator variable ``v`` (exponent
    ``e``) is eliminated through ``v^e = (x/c) D / N'``; what remains is a
    polynomial of degree < e in ``v`` whose coefficients, collected over the
    monomials of the other parameters, must vanish.
    """

    def __init__(self, params: ParamField, scalings: Sequence[Scaling]):
        self.params = params
        self.scalings = [s for s in scalings if s.is_monomial_ratio()]
        names = list(params.names)
        self.snames = [s.name for s in self.scalings]
        self.ring = PolyRing(names + self.snames, QQ, grlex)
        self.target = PolyRing(self.snames, QQ, grlex) if self.snames else None
        self.np = len(names)
        self.plan = []
        used = set()
        for si, s in enumerate(self.scalings):
            num, den = s.expr.numer, s.expr.denom
            (nmon, ncoef), = num.terms()
            (dmon, dcoef), = den.terms()
            others = set()
            for t in self.scalings:
                if t is not s:
                    others.update(params.free_symbols(t.expr))
            cands = [(i, e) for i, e in enumerate(nmon) if e and i not in used]
            if not cands:
                raise UnresolvedConstraints(f"scaling {s.name} has no numerator variable to eliminate")
            cands.sort(key=lambda ie: (params.names[ie[0]] in others, -ie[1], ie[0]))
            v, e = cands[0]
            used.add(v)
            rest = tuple(x - (e if i == v else 0) for i, x in enumerate(nmon))
            c = QQ(ncoef) / QQ(dcoef)
            self.plan.append((v, e, rest, dmon, c, self.np + si))

    def _lift(self, p):
        return self.ring.from_dict({tuple(m) + (0,) * len(self.snames): c for m, c in p.terms()})

    def _reduce(self, p, step):
        v, e, rest, dmon, c, xi = step
        terms = p.terms()
        qmax = max(m[v] // e for m, _ in terms)
        if qmax == 0:
            return p
        out = {}
        for m, coef in terms:
            q, r = divmod(m[v], e)
            nm = list(m)
            nm[v] = r
            # multiply by N'^(qmax - q) * D^q * x^q / c^q
            for i in range(self.np):
                nm[i] += rest[i] * (qmax - q) + dmon[i] * q
            nm[xi] += q
            key = tuple(nm)
            out[key] = out.get(key, QQ(0)) + QQ(coef) / c ** q
        return self.ring.from_dict({k: c2 for k, c2 in out.items() if c2})

    def equations(self, p) -> list:
        """Polynomials in the scaled variables whose common zeros make ``p`` vanish."""
        polys = [self._lift(p)]
        for step in self.plan:
            v, e = step[0], step[1]
            nxt = []
            for q in polys:
                q = self._reduce(q, step)
                by_r: dict[int, dict] = {}
                for m, c in q.terms():
                    by_r.setdefault(m[v], {})[m] = c
                if len(by_r) == 1:
                    (r, terms), = by_r.items()
                    q = self.ring.from_dict(terms)
                    if r:
                        q = q * self.ring.gens[v] ** (e - r)
                        q = self._reduce(q, step)
                    nxt.append(q)
                else:
                    for r, terms in sorted(by_r.items()):
                        nxt.append(self.ring.from_dict(terms))
            polys = nxt
        out = []
        for q in polys:
            groups: dict[tuple, dict] = {}
            for m, c in q.terms():
                groups.setdefault(m[:self.np], {})[m[self.np:]] = c
            for g in groups.values():
                out.append(self.target.from_dict(g))
        return out


# ---------------------------------------------------------------------------
# branches
# ---------------------------------------------------------------------------

@dataclass
class SubeqBranch:
    """One solution branch: parameter constraints and the subequation on them."""

    kind: str                        # "generic", "gcd" or "quotient"
    constraints: list                # MPoly conditions in the original parameters
    substitution: dict               # eliminated parameter -> FracElem in ``params``
    params: ParamField               # remaining symbols
    coefficients: dict               # (j, k) -> FracElem
    subeq: AutonomousODE | None
    source_families: list
    rows_used: list
    scaled_values: dict = dc_field(default_factory=dict)
    verified_terms: int = 0
    free_unknowns: list = dc_field(default_factory=list)

    def render_constraints(self) -> list[str]:
        return [f"{render_poly(c)} = 0" for c in self.constraints]

    def render_substitution(self) -> list[str]:
        return [f"{k} = {render(v)}" for k, v in self.substitution.items()]


@dataclass
class SolveResult:
    branches: list
    rows_used: list                  # [(family, j)] of the generic Cramer subsystem
    J: int
    generic_rank: int
    unknowns: int
    residuals: list                  # stripped residual numerators (generic)
    gcd: object | None
    quotient_equations: list = dc_field(default_factory=list)
    unresolved: list = dc_field(default_factory=list)
    rejected: list = dc_field(default_factory=list)


def _specialize_poly(params: ParamField, p) -> tuple[str, object] | None:
    """Pick ``(name, value)`` solving the polynomial ``p`` (one square-free factor) linearly.

    Prefers a variable whose coefficient is a constant or a monomial in
    symbols declared nonzero, scanning later-declared symbols first.
    """
    fallback = None
    for i in range(len(params.names) - 1, -1, -1):
        if p.degree(i) != 1:
            continue
        c1 = p.coeff_wrt(i, 1)
        c0 = p.coeff_wrt(i, 0)
        if params.is_nonzero_monomial(c1) or c1.is_ground:
            return params.names[i], (-params.field.new(c0)) / params.field.new(c1)
        if fallback is None:
            fallback = (params.names[i], (-params.field.new(c0)) / params.field.new(c1))
    return fallback


def _apply_constraints(params: ParamField, constraints: Sequence, base: ParamField):
    """Solve each constraint for one parameter in turn; returns (field, substitution)."""
    subst: dict = {}
    cur = params
    for c in constraints:
        expr = _in_field(c, base, cur, subst)
        if not expr:
            continue
        num = cur.strip_nonzero_factors(expr.numer)
        if num.is_ground:
            return None
        fz = factor_limited(num)
        factors = [f.poly for f in fz.factors]
        if len(factors) != 1:
            raise UnresolvedConstraints(
                f"constraint {render_poly(num)} splits into several factors", [num])
        choice = _specialize_poly(cur, factors[0])
        if choice is None:
            raise UnresolvedConstraints(
                f"constraint {render_poly(factors[0])} is not linear in any parameter", [factors[0]])
        name, value = choice
        nxt = cur.without([name])
        value = substitute(value, cur, nxt)
        subst = {k: substitute(v, cur, nxt, {name: value}) for k, v in subst.items()}
        subst[name] = value
        cur = nxt
    return cur, subst


def _in_field(c, base: ParamField, cur: ParamField, subst: Mapping):
    return substitute(base.field.new(c.set_ring(base.ring)), base, cur, subst)


class BranchSolver:
    """Solve a :class:`LinearSystem` and split its parameter conditions into branches."""

    def __init__(self, system: LinearSystem, scalings: Sequence[Scaling] = (), seed: int = 0):
        self.system = system
        self.scalings = list(scalings)
        self.seed = seed
        self.base = system.params

    # -- linear solve -------------------------------------------------------

    def _solve_linear(self, rows: list, params: ParamField):
        sub = LinearSystem(self.system.template, params, rows, self.system.J, self.system.families)
        chosen = select_rows(sub, self.seed)
        A, rhs = sub.matrix(chosen)
        res = bareiss_solve(A, rhs) if chosen else None
        unk = self.system.template.unknowns
        if res is None:
            sol = [params.zero] * len(unk)
            free = list(unk)
        else:
            sol = res.solution
            free = [unk[j] for j in range(len(unk)) if j not in res.pivot_cols]
        coeffs = dict(zip(unk, sol))
        coeffs[self.system.template.leading] = params.one
        residuals = []
        for i, row in enumerate(rows):
            if i in set(chosen):
                continue
            s = params.zero
            for jk, v in row.coeffs.items():
                a = coeffs[jk]
                if a:
                    s += a * v
            if s:
                residuals.append(params.strip_nonzero_factors(s.numer))
        return coeffs, residuals, [(rows[i].family, rows[i].j) for i in chosen], free

    # -- main entry ----------------------------------------------------------

    def solve(self) -> SolveResult:
        base = self.base
        coeffs, residuals, used, free = self._solve_linear(self.system.rows, base)
        residuals = _dedupe(residuals)
        result = SolveResult([], used, self.system.J, len(used), len(self.system.template.unknowns),
                             residuals, None)
        if not residuals:
            br = self._make_branch("generic", [], base, {}, coeffs, used, free)
            result.branches.append(br)
            return result
        if any(r.is_ground for r in residuals):
            result.unresolved.append("the system is inconsistent for generic parameters")
        g = gcd_many(residuals)
        candidates = []
        if g is not None and not g.is_ground:
            g = primitive(g)
            result.gcd = g
            for f in factor_limited(g).factors:
                candidates.append(("gcd", [primitive(f.poly)], {}))
            quotients = []
            for r in residuals:
                while True:
                    try:
                        r = r.exquo(g)
                    except Exception:
                        break
                quotients.append(r)
        else:
            quotients = residuals
        quotients = _dedupe([primitive(q) for q in quotients if not q.is_ground])
        if quotients:
            mono = [s for s in self.scalings if s.is_monomial_ratio()]
            if not mono:
                result.unresolved.append(
                    "no scaling declared; remaining conditions: "
                    + "; ".join(render_poly(q) for q in quotients))
            else:
                candidates.extend(self._quotient_branches(quotients, g, result))
        for kind, constraints, scaled in candidates:
            try:
                br = self._solve_branch(kind, constraints, scaled)
            except UnresolvedConstraints as exc:
                result.unresolved.append(str(exc))
                continue
            if br is None:
                result.rejected.append(
                    {"kind": kind, "constraints": [render_poly(c) for c in constraints],
                     "reason": "residual rows do not vanish on the constraint locus"})
                continue
            result.branches.append(br)
        return result

    def _quotient_branches(self, quotients, g, result: SolveResult):
        rw = _ScaledRewriter(self.base, self.scalings)
        eqs = []
        for q in quotients:
            eqs.extend(rw.equations(q))
        eqs = _dedupe([primitive(e) for e in eqs if e])
        result.quotient_equations = [render_poly(e) for e in eqs]
        sol = solve_polynomial_system(eqs)
        result.unresolved.extend(f"quotient system: {u}" for u in sol.unresolved)
        g_eqs = rw.equations(g) if g is not None and not g.is_ground else []
        out = []
        for pt in sol.points:
            if g_eqs and all(not _eval_scaled(e, pt) for e in g_eqs):
                continue
            constraints = []
            for s in rw.scalings:
                val = pt[s.name]
                num = s.expr.numer - s.expr.denom.mul_ground(val)
                constraints.append(primitive(num))
            out.append(("quotient", constraints, dict(pt)))
        return out

    def _solve_branch(self, kind, constraints, scaled):
        applied = _apply_constraints(self.base, constraints, self.base)
        if applied is None:
            return None
        params, subst = applied
        rows = []
        for r in self.system.rows:
            vals = {}
            for jk, v in r.coeffs.items():
                w = substitute(v, self.base, params, subst)
                if w:
                    vals[jk] = w
            rows.append(Row(r.family, r.j, vals))
        coeffs, residuals, used, free = self._solve_linear(rows, params)
        if residuals:
            return None
        br = self._make_branch(kind, constraints, params, subst, coeffs, used, free)
        br.scaled_values = self._scaled_values(params, subst, scaled)
        return br

    def _scaled_values(self, params, subst, known):
        out = {}
        for s in self.scalings:
            if s.uses_k:
                continue
            if s.name in known:
                out[s.name] = rat(known[s.name])
                continue
            v = substitute(s.expr, self.base, params, subst)
            if params.is_constant(v):
                out[s.name] = rat(v.numer.LC) / rat(v.denom.LC)
        return out

    def _make_branch(self, kind, constraints, params, subst, coeffs, used, free):
        ring = u_ring(params, 1)
        poly = ring.from_dict({jk: params.convert(c) for jk, c in coeffs.items() if c})
        subeq = AutonomousODE(poly, params) if poly else None
        fams = list(range(len(self.system.families)))
        return SubeqBranch(kind, list(constraints), dict(subst), params, dict(coeffs), subeq,
                           fams, used, {}, 0, free)


def _eval_scaled(p, point: Mapping):
    vals = [QQ(point[str(s)]) for s in p.ring.symbols]
    return p.evaluate(list(zip(p.ring.gens, vals))) if vals else p.LC


def _dedupe(polys):
    out, seen = [], set()
    for p in polys:
        key = tuple(sorted(p.terms()))
        if key not in seen:
            seen.add(key)
            out.append(p)
    out.sort(key=lambda p: (len(p.terms()), render_poly(p)))
    return out


def specialize_series(lf: LaurentFamily, params: ParamField, subst: Mapping) -> list:
    """Coefficients of ``lf``'s series moved onto a branch field."""
    return [substitute(c, lf.params, params, subst) for c in lf.series.coeffs]


def verify_branch(branch: SubeqBranch, template: SubeqTemplate, families: Sequence[LaurentFamily],
                  terms: int | None = None) -> tuple[bool, int, tuple | None]:
    """Expand the branch subequation on every enforced series; all rows must vanish.

    Returns ``(ok, rows checked per family, first failure (family, j, value) or None)``.
    """
    from .series import LaurentSeries
    checked = None
    for fi, lf in enumerate(families):
        cs = specialize_series(lf, branch.params, branch.substitution)
        if terms is not None:
            cs = cs[:terms]
        spec = LaurentFamily(lf.family, LaurentSeries(lf.series.offset, cs, lf.series.offset + len(cs) - 1,
                                                      branch.params.field), branch.params)
        coeffs = {jk: branch.params.convert(c) for jk, c in branch.coefficients.items()}
        vals = expansion_rows(template, spec, branch.params, len(cs), coeffs)
        for j, v in enumerate(vals):
            if v:
                return False, j, (fi, j, v)
        checked = len(cs) if checked is None else min(checked, len(cs))
    return True, checked or 0, None


def solve_branches(system: LinearSystem, scalings: Sequence[Scaling] = (), seed: int = 0,
                   verify_families: Sequence[LaurentFamily] | None = None) -> SolveResult:
    """Solve the linear system and split the leftover parameter conditions into branches.

    Each branch is re-verified against ``verify_families`` (default: the
    system's own series, to their full length); branches that fail are
    moved to ``result.rejected``.
    """
    result = BranchSolver(system, scalings, seed).solve()
    fams = verify_families if verify_families is not None else system.families
    kept = []
    for br in result.branches:
        ok, n, fail = verify_branch(br, system.template, fams)
        if ok:
            br.verified_terms = n
            kept.append(br)
        else:
            fi, j, v = fail
            result.rejected.append({"kind": br.kind,
                                    "constraints": [render_poly(c) for c in br.constraints],
                                    "reason": f"row F_{j} of family {fi + 1} is {render(v)}"})
    result.branches = kept
    return result
