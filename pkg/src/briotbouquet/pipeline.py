"""End-to-end driver: problem file -> analysis -> subequations -> closed forms -> checks.

Reports are plain JSON-ready dicts (schema 1) built deterministically from
the problem text, the flags and the seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from importlib import metadata
from typing import Mapping, Sequence

from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyRing

from .arith import ParamField, rat, render, render_poly, substitute
from .closed_forms import (EllipticForm, RationalForm, TrigForm, degenerate_branches,
                           degenerate_check, integrate_genus0, integrate_genus1)
from .curves import PlaneCurve, genus_report, is_briot_bouquet_shape
from .errors import (BriotBouquetError, DegenerateBalance, NoClosedForm, OdeSyntaxError,
                     ProblemFileError)
from .ode import AutonomousODE, parse_ode, parse_params, parse_u_poly, u_ring
from .singular import (fuchs_indices, laurent_expand, leading_order_analysis, resonance_names,
                       residue_conditions)
from .subeq import (SubeqBranch, SubeqTemplate, assemble_system, elliptic_order, parse_scalings,
                    select_rows, solve_branches)
from .verify import verify_exact, verify_numeric, verify_subeq_consequence

SCHEMA = 1
ESCALATION_STEP = 4
MAX_ESCALATIONS = 3
NUMERIC_POINTS = 20


# ---------------------------------------------------------------------------
# problem files
# ---------------------------------------------------------------------------

@dataclass
class Problem:
    ode: AutonomousODE
    ode_text: str
    params_text: str = ""
    scaling_text: str = ""
    bounds: tuple | None = None
    families: tuple | None = None      # 1-based family indices to enforce
    source: str = "<problem>"

    def to_dict(self) -> dict:
        out = {"ode": self.ode_text, "params": self.params_text}
        if self.scaling_text:
            out["scaling"] = self.scaling_text
        if self.bounds:
            out["bounds"] = list(self.bounds)
        if self.families:
            out["families"] = list(self.families)
        return out


_FIELDS = ("ode", "params", "scaling", "bounds", "families")


def _int_list(text: str, what: str, source: str, line: int) -> tuple:
    try:
        vals = tuple(int(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise ProblemFileError(f"{what} must be integers, got {text!r}", source, line) from None
    if not vals:
        raise ProblemFileError(f"empty {what}", source, line)
    return vals


def parse_problem(text: str, source: str = "<problem>") -> Problem:
    """Parse ``field: value`` lines (``#`` starts a comment)."""
    fields, lines = {}, {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        key = key.strip().lower()
        if not sep or key not in _FIELDS:
            raise ProblemFileError(f"expected one of {', '.join(_FIELDS)} followed by ':'", source, no)
        if key in fields:
            raise ProblemFileError(f"duplicate field {key!r}", source, no)
        fields[key], lines[key] = value.strip(), no
    if "ode" not in fields:
        raise ProblemFileError("missing 'ode:' line", source)
    params_text = fields.get("params", "")
    try:
        params = parse_params(params_text)
    except OdeSyntaxError as e:
        raise ProblemFileError(str(e), source, lines.get("params"), e.code) from e
    try:
        ode = parse_ode(fields["ode"], params)
    except BriotBouquetError as e:
        raise ProblemFileError(str(e), source, lines["ode"], e.code) from e
    scaling = fields.get("scaling", "")
    if scaling:
        try:
            parse_scalings(scaling, params)
        except OdeSyntaxError as e:
            raise ProblemFileError(str(e), source, lines["scaling"], e.code) from e
    bounds = None
    if "bounds" in fields:
        bounds = _int_list(fields["bounds"], "bounds", source, lines["bounds"])
        if len(bounds) != 2 or min(bounds) < 0:
            raise ProblemFileError("bounds take two non-negative integers: numerator, denominator",
                                   source, lines["bounds"])
    fams = _int_list(fields["families"], "families", source, lines["families"]) \
        if "families" in fields else None
    return Problem(ode, fields["ode"], params_text, scaling, bounds, fams, source)


def load_problem(path: str) -> Problem:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ProblemFileError(e.strerror or str(e), path) from e
    return parse_problem(text, path)


def read_scaling_file(path: str) -> str:
    """Scaling declarations from a file: either a ``scaling:`` line or bare text."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    items = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower().startswith("scaling:"):
            line = line.split(":", 1)[1].strip()
        items.append(line)
    return ", ".join(items)


# ---------------------------------------------------------------------------
# analysis
# ---------------------------------------------------------------------------

def default_terms(m: int) -> int:
    """Rows per family for the linear solve: the full template size plus two."""
    return (m + 1) ** 2 + 2


def _family_dict(idx, fam, ode) -> tuple[dict, object]:
    out = {"index": idx + 1, "p": fam.p, "u0": render(fam.u0), "multiplicity": fam.multiplicity,
           "dominant_terms": [AutonomousODE(u_ring(ode.params, ode.order).from_dict({m: 1}),
                                            ode.params).render() for m in fam.dominant_terms]}
    try:
        ind = fuchs_indices(fam, ode)
    except DegenerateBalance as e:
        out["degenerate"] = str(e)
        return out, None
    out["indicial"] = ind.render()
    out["indices"] = [f"{r.numerator}/{r.denominator}" if r.denominator != 1 else str(r.numerator)
                      for r, _ in ind.rational_roots]
    if ind.irreducible:
        out["irrational_indices"] = list(ind.irreducible)
    return out, ind


def _expand_families(ode, families, J, tagged: bool):
    out = []
    for i, fam in enumerate(families):
        ind = fuchs_indices(fam, ode)
        tag = str(i + 1) if tagged else ""
        names = resonance_names(ind.positive_integer_indices, tag)
        out.append(laurent_expand(fam, ode, J, names=names))
    return out


def analyze(problem: Problem, terms: int | None = None) -> dict:
    """Families, Fuchs indices, Laurent series and the residue condition."""
    ode = problem.ode
    families, excluded = leading_order_analysis(ode)
    J = terms or 8
    report = {"schema": SCHEMA, "command": "analyze", "problem": problem.to_dict(),
              "ode": ode.render(), "order": ode.order, "families": [],
              "excluded_families": [{"p": e.p, "factor": e.factor, "reason": e.reason} for e in excluded]}
    expandable = []
    for i, fam in enumerate(families):
        d, ind = _family_dict(i, fam, ode)
        report["families"].append(d)
        if ind is not None:
            expandable.append((i, fam))
    tagged = len(families) > 1
    lfs = []
    for i, fam in expandable:
        ind = fuchs_indices(fam, ode)
        names = resonance_names(ind.positive_integer_indices, str(i + 1) if tagged else "")
        lf = laurent_expand(fam, ode, J, names=names)
        lfs.append(lf)
        entry = report["families"][i]
        entry["series"] = [render(c) for c in lf.series.coeffs]
        entry["resonances"] = [name for _, name in lf.resonance_syms]
    if lfs and len(lfs) == len(families):
        report["residue_condition"] = residue_conditions(lfs)[0].render()
    report["terms"] = J
    return report


# ---------------------------------------------------------------------------
# solving
# ---------------------------------------------------------------------------

def _params_list(params: ParamField) -> list[dict]:
    return [{"name": n, "nonzero": n in params.nonzero, "origin": params.origins[n]}
            for n in params.names]


def _params_from_list(items) -> ParamField:
    names = [d["name"] for d in items]
    return ParamField(names, [d["name"] for d in items if d.get("nonzero")],
                      {d["name"]: d.get("origin", "parameter") for d in items})


def _sample_values(params: ParamField, rng: random.Random) -> dict:
    return {n: rat(rng.choice([i for i in range(-9, 10) if i])) / rng.randint(1, 5)
            for n in params.names}


def classify_genus(subeq: AutonomousODE, seed: int, attempts: int = 6) -> dict:
    """Genus of the subequation's curve at seeded random rational parameter values."""
    rng = random.Random(seed)
    last = None
    for _ in range(attempts):
        vals = _sample_values(subeq.params, rng)
        try:
            curve = PlaneCurve.from_subeq(subeq, vals)
            if curve.poly.degree(1) != subeq.poly.degree(1):
                continue
            rep = genus_report(curve)
        except (BriotBouquetError, ValueError, ZeroDivisionError) as e:
            last = e
            continue
        return {"genus": rep.genus, "degree": rep.degree,
                "sample": {k: _fmt_rat(v) for k, v in vals.items()},
                "singular_points": [{"point": p.coordinates, "field": p.field,
                                     "multiplicity": p.multiplicity, "delta": p.delta,
                                     "count": p.count} for p in rep.singular_points]}
    return {"genus": None, "reason": str(last) if last else "no admissible sample"}


def _fmt_rat(v) -> str:
    v = rat(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _scaled_form_values(scalings, base: ParamField, chain: Sequence, form) -> dict:
    """Values of the declared scalings on a closed form's parameter locus.

    ``chain`` lists ``(field, substitution)`` steps from ``base`` to the
    form's field; ``k`` in a scaling stands for the form's ``k`` (only
    ``k^2`` may appear).
    """
    out = {}
    k2 = getattr(form, "k2", None) if isinstance(form, TrigForm) else None
    for s in scalings:
        expr = s.expr
        src = s.params
        if s.uses_k:
            if k2 is None:
                continue
            expr = _k_to_k2(expr, src)
            src = src.without(["k"]).extend(["k2"])
        fld = src
        ok = True
        for target, subst in chain:
            tgt = target.extend(["k2"]) if "k2" in fld.names else target
            try:
                expr = substitute(expr, fld, tgt, subst)
            except (ValueError, BriotBouquetError):
                ok = False
                break
            fld = tgt
        if not ok:
            continue
        if "k2" in fld.names:
            expr = substitute(expr, fld, form.params, {"k2": k2})
            fld = form.params
        if fld.is_constant(expr):
            out[s.name] = _fmt_rat(rat(expr.numer.LC) / rat(expr.denom.LC)) if expr else "0"
    return out


def _k_to_k2(expr, params: ParamField):
    ki = params.names.index("k")
    new = params.without(["k"]).extend(["k2"])

    def conv(p):
        terms = {}
        for mon, c in p.terms():
            if mon[ki] % 2:
                raise ValueError("scaling uses an odd power of k")
            m = list(mon[:ki] + mon[ki + 1:]) + [mon[ki] // 2]
            terms[tuple(m)] = c
        return new.field.new(new.ring.from_dict(terms))
    return conv(expr.numer) / conv(expr.denom)


def _form_dict(form) -> dict:
    d = form.to_dict()
    d["params"] = _params_list(form.params)
    d["substitution"] = {k: render(v) for k, v in form.substitution.items()}
    d["constraints"] = list(form.constraints)
    return d


def _check_form(form, ode_b: AutonomousODE, subeq: AutonomousODE | None, seed: int) -> dict:
    exact = verify_exact(form, ode_b)
    out = {"exact_ok": exact.exact_ok, "exact_remainder": exact.exact_remainder}
    if subeq is not None:
        sub = verify_exact(form, subeq)
        out["subequation_ok"] = sub.exact_ok
    try:
        num = verify_numeric(form, ode_b, NUMERIC_POINTS, seed)
        out["numeric"] = num.to_dict()
        out["numeric_ok"] = num.numeric_max_residual < 1e-9
    except BriotBouquetError as e:
        out["numeric"] = e.to_dict()
        out["numeric_ok"] = False
    out["ok"] = bool(out["exact_ok"] and out.get("subequation_ok", True) and out["numeric_ok"])
    return out


def _minimal(forms):
    if not forms:
        return forms
    least = min(len(f.constraints) for f in forms)
    return [f for f in forms if len(f.constraints) == least]


def _integrate(branch: SubeqBranch, ode: AutonomousODE, genus: int | None, pole_orders,
               bounds, scalings, seed) -> tuple[list, list, str | None]:
    """Closed forms (with checks) and degenerations for one branch."""
    subeq = branch.subeq
    ode_b = ode.over(branch.params, branch.substitution)
    chain = [(branch.params, branch.substitution)]
    forms, degens = [], []
    single = len(pole_orders) == 1
    P = pole_orders[0] if single else max(pole_orders)
    try:
        if genus == 1:
            if not single:
                raise NoClosedForm("a polynomial in (wp, wp') has one pole per period cell; "
                                   f"{len(pole_orders)} families were enforced")
            found = _minimal(integrate_genus1(subeq, P))
        elif genus == 0:
            found = _minimal(integrate_genus0(subeq, tuple(bounds) if bounds else (P, 0)))
        else:
            raise NoClosedForm("genus could not be determined")
    except NoClosedForm as e:
        return [], [], str(e)
    for i, form in enumerate(found):
        d = _form_dict(form)
        d["scaled_values"] = _scaled_form_values(scalings, ode.params,
                                                 chain + [(form.params, form.substitution)], form)
        d["verification"] = _check_form(form, ode_b, subeq, seed + i)
        forms.append(d)
        if isinstance(form, EllipticForm):
            d["discriminant"] = degenerate_check(form.g2, form.g3).kind
            for j, (name, value, fld, tf) in enumerate(degenerate_branches(form)):
                dd = _form_dict(tf)
                dd["locus"] = f"{name} = {render(value)}"
                dd["scaled_values"] = _scaled_form_values(
                    scalings, ode.params,
                    chain + [(form.params, form.substitution), (tf.params, {name: value})], tf)
                dd["verification"] = _check_form(tf, ode_b, subeq, seed + 100 + j)
                degens.append(dd)
    return forms, degens, None


def _branch_dict(idx, br: SubeqBranch, template, lfs_long, ode, scalings, bounds, pole_orders,
                 seed) -> dict:
    d = {"index": idx + 1, "kind": br.kind, "constraints": br.render_constraints(),
         "substitution": {k: render(v) for k, v in br.substitution.items()},
         "params": _params_list(br.params),
         "scaled_values": {k: _fmt_rat(v) for k, v in br.scaled_values.items()},
         "subequation": br.subeq.render() if br.subeq is not None else None}
    if br.free_unknowns:
        d["free_unknowns"] = list(br.free_unknowns)
    if template is not None:
        cons = verify_subeq_consequence(br, template, lfs_long)
        d["series_check"] = cons.to_dict()
        sub_ok = cons.exact_ok
    else:
        d["series_check"] = {"exact_ok": True, "note": "the input ODE is its own subequation"}
        sub_ok = True
    d["genus"] = classify_genus(br.subeq, seed + idx)
    forms, degens, note = _integrate(br, ode, d["genus"].get("genus"), pole_orders, bounds,
                                     scalings, seed + 1000 * (idx + 1))
    d["closed_forms"] = forms
    if degens:
        d["degenerations"] = degens
    if note:
        d["integration_note"] = note
    d["solved"] = bool(sub_ok and forms and all(f["verification"]["ok"] for f in forms))
    return d


def _versions() -> dict:
    from . import __version__
    out = {"briotbouquet": __version__}
    for pkg in ("sympy", "mpmath"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = "unknown"
    return out


def _input_branch(ode: AutonomousODE) -> SubeqBranch:
    coeffs = {(m[0], m[1]): c for m, c in ode.poly.terms()}
    return SubeqBranch("input", [], {}, ode.params, coeffs, ode, [], [])


def solve(problem: Problem, terms: int | None = None, families: Sequence[int] | None = None,
          max_degree: int | None = None, seed: int = 0, scaling_text: str | None = None) -> dict:
    """Run the whole pipeline; ``report["exit_code"]`` follows the CLI contract."""
    ode = problem.ode
    scaling_text = problem.scaling_text if scaling_text is None else scaling_text
    scalings = parse_scalings(scaling_text, ode.params)
    all_fams, excluded = leading_order_analysis(ode)
    report = {"schema": SCHEMA, "command": "solve", "problem": problem.to_dict(),
              "ode": ode.render(), "order": ode.order,
              "excluded_families": [{"p": e.p, "factor": e.factor, "reason": e.reason}
                                    for e in excluded]}
    if scaling_text != problem.scaling_text:
        report["problem"]["scaling"] = scaling_text
    wanted = families or problem.families
    if wanted:
        bad = [i for i in wanted if not 1 <= i <= len(all_fams)]
        if bad:
            raise ProblemFileError(f"no family {bad[0]}: {len(all_fams)} found", problem.source)
        fams = [all_fams[i - 1] for i in wanted]
    else:
        fams = list(all_fams)
    report["families"] = [_family_dict(i, f, ode)[0] for i, f in enumerate(all_fams)]
    report["enforced_families"] = [all_fams.index(f) + 1 for f in fams]
    provenance = {"seed": seed, "versions": _versions()}
    pole_orders = [abs(f.p) for f in fams]

    if ode.order == 1 and is_briot_bouquet_shape(_curve_poly(ode)):
        # a first-order Briot-Bouquet equation is its own subequation
        branches = [_branch_dict(0, _input_branch(ode), None, [], ode, scalings, problem.bounds,
                                 pole_orders or [1], seed)]
        report["subequation"] = {"source": "input"}
    else:
        m, n = elliptic_order(fams)
        if max_degree is not None and m > max_degree:
            raise NoClosedForm(f"elliptic order m={m} exceeds --max-degree {max_degree}")
        template = SubeqTemplate.for_families(fams)
        J = terms or default_terms(m)
        tagged = len(fams) > 1
        for attempt in range(MAX_ESCALATIONS + 1):
            lfs_long = _expand_families(ode, fams, J + 2 * ESCALATION_STEP, tagged)
            ranks = {Jx: len(select_rows(assemble_system(template, lfs_long, Jx), seed))
                     for Jx in (J, J + ESCALATION_STEP, J + 2 * ESCALATION_STEP)}
            if len(set(ranks.values())) > 1 and terms is None and attempt < MAX_ESCALATIONS:
                J += ESCALATION_STEP
                continue
            system = assemble_system(template, lfs_long, J)
            result = solve_branches(system, scalings, seed, verify_families=lfs_long)
            if not result.rejected or terms is not None:
                break
            J += ESCALATION_STEP
        for lf, entry in zip(lfs_long, [report["families"][all_fams.index(f)] for f in fams]):
            entry["series"] = [render(c) for c in lf.series.coeffs]
            entry["resonances"] = [name for _, name in lf.resonance_syms]
        report["residue_condition"] = residue_conditions(lfs_long)[0].render()
        report["subequation"] = {
            "m": m, "n": n, "unknowns": len(template.unknowns), "J": J,
            "series_terms": J + 2 * ESCALATION_STEP, "escalations": attempt,
            "rank_by_rows": {str(k): v for k, v in ranks.items()},
            "rows_used": [list(r) for r in result.rows_used],
            "generic_rank": result.generic_rank,
            "gcd": render_poly(result.gcd) if result.gcd is not None else None,
            "quotient_equations": [str(q) for q in result.quotient_equations],
            "unresolved": list(result.unresolved),
            "rejected": [str(r) for r in result.rejected]}
        provenance.update(J=J, series_terms=J + 2 * ESCALATION_STEP)
        branches = [_branch_dict(i, br, template, lfs_long, ode, scalings, problem.bounds,
                                 pole_orders, seed) for i, br in enumerate(result.branches)]
    report["branches"] = branches
    report["provenance"] = provenance
    solved = [b for b in branches if b["solved"]]
    report["status"] = "solved" if solved else "no_closed_form"
    report["exit_code"] = 0 if solved else 2
    return report


def _curve_poly(ode: AutonomousODE):
    ring = PolyRing(["u", "v"], ode.params.field.to_domain(), grlex)
    return ring.from_dict({(m[0], m[1]): c for m, c in ode.poly.terms()})


# ---------------------------------------------------------------------------
# re-verification of stored reports
# ---------------------------------------------------------------------------

def form_from_dict(d: Mapping) -> object:
    """Rebuild a closed form from its report entry."""
    params = _params_from_list(d["params"])
    subst = {k: params.parse(v) for k, v in d.get("substitution", {}).items()}
    cons = list(d.get("constraints", []))
    kind = d["type"]
    if kind == "elliptic":
        wp = {int(i): params.parse(v) for i, v in d["wp"].items()}
        wpp = {int(i): params.parse(v) for i, v in d["wp_prime"].items()}
        return EllipticForm(params, wp, wpp, params.parse(d["g2"]),
                            params.parse(d["g3"]), subst, cons)
    var = "tau" if kind == "trigonometric" else "t"
    ring = PolyRing([var], params.field.to_domain(), grlex)

    def poly(coeffs):
        vals = [params.parse(c) for c in coeffs]
        return ring.from_dict({(i,): v for i, v in enumerate(vals) if v})
    num, den = poly(d["numerator"]), poly(d["denominator"])
    if kind == "trigonometric":
        return TrigForm(params, num, den, params.parse(d["k2"]), subst, cons)
    return RationalForm(params, num, den, subst, cons)


def verify_report(report: Mapping, problem: Problem | None = None) -> tuple[bool, list[str]]:
    """Re-run the exact checks on a stored solve report.

    Returns ``(ok, messages)``; the first failing remainder is reported for
    each tampered item.
    """
    msgs: list[str] = []
    if not report or not report.get("branches"):
        return True, ["warning: report has no branches; nothing to verify"]
    if report.get("schema") != SCHEMA:
        return False, [f"unsupported report schema {report.get('schema')!r}"]
    if problem is None:
        p = report["problem"]
        lines = [f"ode: {p['ode']}", f"params: {p.get('params', '')}"]
        if p.get("scaling"):
            lines.append(f"scaling: {p['scaling']}")
        problem = parse_problem("\n".join(lines), "<report>")
    ode = problem.ode
    ok = True
    sub_info = report.get("subequation", {})
    template, lfs = None, []
    if sub_info.get("source") != "input":
        fams, _ = leading_order_analysis(ode)
        fams = [fams[i - 1] for i in report.get("enforced_families", range(1, len(fams) + 1))]
        template = SubeqTemplate.for_families(fams)
        lfs = _expand_families(ode, fams, sub_info.get("series_terms", 26), len(fams) > 1)
    for b in report["branches"]:
        label = f"branch {b['index']}"
        params = _params_from_list(b["params"])
        subst = {k: params.parse(v) for k, v in b.get("substitution", {}).items()}
        if b.get("subequation") is None:
            continue
        try:
            poly = parse_u_poly(b["subequation"], params, 1)
        except BriotBouquetError as e:
            ok = False
            msgs.append(f"{label}: cannot parse subequation: {e}")
            continue
        subeq = AutonomousODE(poly, params)
        if template is not None:
            coeffs = {(m[0], m[1]): c for m, c in poly.terms()}
            br = SubeqBranch(b["kind"], [], subst, params, coeffs, subeq, [], [])
            rep = verify_subeq_consequence(br, template, lfs)
            if not rep.exact_ok:
                ok = False
                msgs.append(f"{label}: subequation fails on the Laurent series: {rep.first_failure}")
            else:
                msgs.append(f"{label}: subequation holds on {rep.series_terms} series terms")
        ode_b = ode.over(params, subst)
        entries = [("closed form", f) for f in b.get("closed_forms", [])]
        entries += [("degeneration", f) for f in b.get("degenerations", [])]
        for what, fd in entries:
            try:
                form = form_from_dict(fd)
            except (BriotBouquetError, KeyError, ValueError) as e:
                ok = False
                msgs.append(f"{label}: unreadable {what}: {e}")
                continue
            rep = verify_exact(form, ode_b)
            if rep.exact_ok:
                msgs.append(f"{label}: {what} {fd.get('text', '')} solves the ODE")
            else:
                ok = False
                msgs.append(f"{label}: {what} fails, remainder {rep.exact_remainder}")
    return ok, msgs
