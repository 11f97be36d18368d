import copy

import pytest

from briotbouquet.errors import ProblemFileError
from briotbouquet.pipeline import analyze, default_terms, parse_problem, verify_report


def test_parse_problem_fields():
    prob = parse_problem("""
        # KS with reporting scalings
        ode: nu*u3 + b*u2 + mu*u1 + (1/2)*u0^2 + A
        params: nu != 0, b, mu, A   # trailing comment
        scaling: x = b^2/(mu*nu), y = nu*A/mu^3
        bounds: 3, 0
        families: 1
    """)
    assert prob.ode.order == 3
    assert prob.bounds == (3, 0) and prob.families == (1,)
    assert prob.to_dict()["scaling"] == "x = b^2/(mu*nu), y = nu*A/mu^3"


@pytest.mark.parametrize("text, line", [
    ("ode: u1\node: u2\n", 2),
    ("ode: u1 + u0^2\nbounds: 1\n", 2),
    ("ode: u1 + u0^2\nbounds: -1, 2\n", 2),
    ("ode: u1 + u0^2\nfamilies: one\n", 2),
    ("params: a b\node: u1\n", 1),
    ("ode: u1 + u0^2\nscaling: x b\n", 2),
])
def test_parse_problem_errors_carry_line(text, line):
    with pytest.raises(ProblemFileError) as info:
        parse_problem(text, "p.txt")
    assert info.value.line == line
    assert str(info.value).startswith(f"p.txt:{line}: ")


def test_default_terms():
    assert default_terms(2) == 11 and default_terms(3) == 18


def test_analyze_reports_degenerate_family():
    rep = analyze(parse_problem("ode: 2*u1^2 + (24*u0^2-3)*u1 + 72*u0^4 - 17*u0^2 + 1\n"))
    [fam] = rep["families"]
    assert "degenerate" in fam and fam["multiplicity"] == 2


def test_input_used_as_its_own_subequation(tanh_ratio_run):
    report, _ = tanh_ratio_run
    assert report["subequation"] == {"source": "input"}
    assert report["status"] == "solved"


def test_ks_report_reverifies(ks_run):
    ok, msgs = verify_report(ks_run[0])
    assert ok, msgs


def test_verify_report_catches_tampered_ks_branch(ks_run):
    report = copy.deepcopy(ks_run[0])
    br = report["branches"][1]
    br["subequation"] = br["subequation"].replace("(9/(40*nu))*u0^4", "(9/(41*nu))*u0^4")
    ok, msgs = verify_report(report)
    assert not ok
    assert any("F_" in m for m in msgs)
