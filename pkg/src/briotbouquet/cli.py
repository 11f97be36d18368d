"""Command line: ``briotbouquet {analyze,solve,verify} ...``.

Exit codes: 0 when verified closed forms exist (or a report re-verifies),
2 when the pipeline ran but produced no verified closed form, 1 on error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import BriotBouquetError
from .pipeline import analyze, load_problem, read_scaling_file, solve, verify_report


def _dump(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False, ensure_ascii=False)


def _families_arg(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated family numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="briotbouquet",
        description="Laurent analysis, first-order subequations and closed-form "
                    "travelling waves of autonomous algebraic ODEs.")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="pole families, Fuchs indices and Laurent series")
    a.add_argument("problem", help="problem file (ode:, params:, ... lines)")
    a.add_argument("--terms", type=int, help="number of Laurent coefficients (default 8)")
    a.add_argument("--json", action="store_true", help="print the JSON report")

    s = sub.add_parser("solve", help="full pipeline: subequations, genus, closed forms, checks")
    s.add_argument("problem")
    s.add_argument("--terms", type=int, help="rows per family J (default (m+1)^2+2, escalated)")
    s.add_argument("--families", type=_families_arg, help="1-based families to enforce, e.g. 1,2")
    s.add_argument("--max-degree", type=int, help="refuse templates of elliptic order m above this")
    s.add_argument("--scaling-from-file", metavar="FILE", help="read scaling declarations from FILE")
    s.add_argument("--seed", type=int, default=0, help="seed for sampling (default 0)")
    s.add_argument("--json", action="store_true", help="JSON report on stdout, summary on stderr")

    v = sub.add_parser("verify", help="re-check a stored solve report")
    v.add_argument("report", help="JSON report written by 'solve --json'")
    v.add_argument("problem", nargs="?", help="problem file (default: the one embedded in the report)")
    v.add_argument("--json", action="store_true")
    return parser


# ---------------------------------------------------------------------------
# human-readable summaries
# ---------------------------------------------------------------------------

def summarize_analysis(rep: dict) -> str:
    lines = [f"ODE: {rep['ode']} = 0"]
    for f in rep["families"]:
        lines.append(f"family {f['index']}: p = {f['p']}, u0 = {f['u0']}"
                     + (f" (multiplicity {f['multiplicity']})" if f["multiplicity"] > 1 else ""))
        if "degenerate" in f:
            lines.append(f"  {f['degenerate']}")
            continue
        lines.append(f"  indicial: {f['indicial']}; rational indices: {', '.join(f['indices'])}")
        for q in f.get("irrational_indices", []):
            lines.append(f"  irrational indices: roots of {q}")
        for k, c in enumerate(f.get("series", [])):
            lines.append(f"  u_{k} = {c}")
    for e in rep["excluded_families"]:
        lines.append(f"excluded: p = {e['p']}, {e['factor']} ({e['reason']})")
    if "residue_condition" in rep:
        lines.append(f"residue condition: {rep['residue_condition']} = 0")
    return "\n".join(lines)


def summarize_solution(rep: dict) -> str:
    lines = [f"ODE: {rep['ode']} = 0"]
    sub = rep.get("subequation", {})
    if sub.get("source") == "input":
        lines.append("the ODE is a first-order Briot-Bouquet equation; used as its own subequation")
    elif sub:
        lines.append(f"m = {sub['m']}, {sub['unknowns']} unknowns, J = {sub['J']}, "
                     f"rows used {sub['rows_used']}")
        if sub.get("gcd"):
            lines.append(f"gcd of residual conditions: {sub['gcd']}")
        for u in sub.get("unresolved", []):
            lines.append(f"unresolved: {u}")
    for b in rep["branches"]:
        head = f"branch {b['index']} ({b['kind']})"
        if b["constraints"]:
            head += ": " + "; ".join(b["constraints"])
        lines.append(head)
        if b["scaled_values"]:
            lines.append("  scaled: " + ", ".join(f"{k} = {v}" for k, v in b["scaled_values"].items()))
        lines.append(f"  subequation: {b['subequation']} = 0")
        g = b["genus"]
        lines.append(f"  genus: {g['genus'] if g.get('genus') is not None else 'unknown'}")
        for f in b["closed_forms"] + b.get("degenerations", []):
            tag = "ok" if f["verification"]["ok"] else "FAILED"
            where = f" [{f['locus']}]" if "locus" in f else ""
            extra = "; ".join(f["constraints"])
            lines.append(f"  {f['text']}{where}{' (' + extra + ')' if extra else ''} -- {tag}")
            if f.get("scaled_values"):
                lines.append("    scaled: " + ", ".join(f"{k} = {v}" for k, v in f["scaled_values"].items()))
        if b.get("integration_note"):
            lines.append(f"  no closed form: {b['integration_note']}")
    lines.append(f"status: {rep['status']}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _error(exc: BaseException, as_json: bool) -> int:
    payload = exc.to_dict() if isinstance(exc, BriotBouquetError) else {
        "error": type(exc).__name__, "message": str(exc)}
    payload["schema"] = 1
    if as_json:
        print(_dump(payload))
    print(f"error: {payload['message']}", file=sys.stderr)
    return 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            rep = analyze(load_problem(args.problem), args.terms)
            if args.json:
                print(_dump(rep))
            else:
                print(summarize_analysis(rep))
            return 0
        if args.command == "solve":
            problem = load_problem(args.problem)
            scaling = read_scaling_file(args.scaling_from_file) if args.scaling_from_file else None
            rep = solve(problem, args.terms, args.families, args.max_degree, args.seed, scaling)
            code = rep.pop("exit_code")
            if args.json:
                print(_dump(rep))
                print(summarize_solution(rep), file=sys.stderr)
            else:
                print(summarize_solution(rep))
            return code
        with open(args.report, encoding="utf-8") as fh:
            text = fh.read()
        report = json.loads(text) if text.strip() else {}
        problem = load_problem(args.problem) if args.problem else None
        ok, msgs = verify_report(report, problem)
        if args.json:
            print(_dump({"schema": 1, "ok": ok, "messages": msgs}))
        for m in msgs:
            print(m, file=sys.stderr if args.json else sys.stdout)
        return 0 if ok else 1
    except (BriotBouquetError, OSError, json.JSONDecodeError) as e:
        return _error(e, getattr(args, "json", False))


if __name__ == "__main__":
    sys.exit(main())
