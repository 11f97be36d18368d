import copy
import json
import subprocess
import sys
from pathlib import Path

import pytest

from briotbouquet.cli import main

GOLDEN = Path(__file__).resolve().parent / "golden"


def _strip_versions(report):
    out = copy.deepcopy(report)
    out.pop("exit_code", None)
    out.get("provenance", {}).pop("versions", None)
    return out


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_summary(capsys, problems_dir):
    code, out, _ = _run(capsys, "analyze", problems_dir / "ks.txt")
    assert code == 0
    assert "p = -3, u0 = 120*nu" in out
    assert "nu*(j + 1)*(j^2 - 13*j + 60)" in out
    assert "residue condition: 16*nu*mu - b^2 = 0" in out


def test_analyze_json(capsys, problems_dir):
    code, out, _ = _run(capsys, "analyze", problems_dir / "kdv.txt", "--json", "--terms", "9")
    assert code == 0
    rep = json.loads(out)
    assert rep["families"][0]["series"] == ["2*a", "0", "0", "0", "U4", "0", "U6", "0", "U4^2/(6*a)"]


def test_solve_kdv_is_deterministic_and_matches_golden(capsys, problems_dir):
    code, first, err = _run(capsys, "solve", problems_dir / "kdv.txt", "--json")
    assert code == 0 and "status: solved" in err
    _, second, _ = _run(capsys, "solve", problems_dir / "kdv.txt", "--json")
    assert first == second
    golden = json.loads((GOLDEN / "kdv_report.json").read_text())
    assert _strip_versions(json.loads(first)) == _strip_versions(golden)


def test_ks_report_matches_golden(ks_run):
    report, _ = ks_run
    golden = json.loads((GOLDEN / "ks_report.json").read_text())
    assert _strip_versions(report) == _strip_versions(golden)


def test_exit_code_two_without_closed_form(capsys, problems_dir):
    code, out, _ = _run(capsys, "solve", problems_dir / "mkdv.txt")
    assert code == 2
    assert "genus: 1" in out and "status: no_closed_form" in out


def test_families_option_selects_one_family(capsys, problems_dir):
    code, out, _ = _run(capsys, "solve", problems_dir / "mkdv.txt", "--families", "2")
    assert code == 0
    assert "45*a^3*U4 + b^2 = 0" in out


def test_max_degree_refuses_large_templates(capsys, problems_dir):
    code, out, err = _run(capsys, "solve", problems_dir / "ks.txt", "--max-degree", "2", "--json")
    assert code == 1
    assert json.loads(out)["error"] == "no_closed_form"


def test_scaling_from_file(capsys, problems_dir, tmp_path):
    scal = tmp_path / "scaling.txt"
    scal.write_text("x = b^2/(mu*nu)\n")
    code, out, _ = _run(capsys, "solve", problems_dir / "kdv.txt", "--scaling-from-file", scal, "--json")
    # b, mu and nu are not parameters of KdV
    assert code == 1 and json.loads(out)["error"] == "undeclared_symbol"


@pytest.mark.parametrize("text, cause", [
    ("ode: u2 + x*u0\n", "non_autonomous"),
    ("# comment\nparams: a\node: u2 + c*u0\n", "undeclared_symbol"),
    ("params: a\n", None),
    ("ode: u1 + u0^2\nbogus: 1\n", None),
])
def test_problem_file_errors_are_structured(capsys, tmp_path, text, cause):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    rc, out, err = _run(capsys, "solve", path, "--json")
    assert rc == 1
    payload = json.loads(out)
    assert payload["error"] == "problem_file" and payload["schema"] == 1
    assert payload.get("cause") == cause
    assert err.startswith("error: ")


def test_missing_file(capsys, tmp_path):
    rc, out, _ = _run(capsys, "analyze", tmp_path / "nope.txt", "--json")
    assert rc == 1 and json.loads(out)["error"] == "problem_file"


def test_verify_accepts_golden_report(capsys):
    rc, out, _ = _run(capsys, "verify", GOLDEN / "kdv_report.json")
    assert rc == 0


def test_verify_rejects_tampered_report(capsys, tmp_path):
    report = json.loads((GOLDEN / "kdv_report.json").read_text())
    report["branches"][0]["subequation"] = report["branches"][0]["subequation"].replace("20*U4", "21*U4")
    path = tmp_path / "tampered.json"
    path.write_text(json.dumps(report))
    rc, out, _ = _run(capsys, "verify", path, "--json")
    assert rc == 1
    assert not json.loads(out)["ok"]


def test_verify_rejects_tampered_closed_form(capsys, tmp_path):
    report = json.loads((GOLDEN / "kdv_report.json").read_text())
    report["branches"][0]["closed_forms"][0]["wp"]["1"] = "3*a"
    path = tmp_path / "tampered.json"
    path.write_text(json.dumps(report))
    rc, _, _ = _run(capsys, "verify", path)
    assert rc == 1


def test_verify_empty_report_warns(capsys, tmp_path):
    path = tmp_path / "empty.json"
    path.write_text("")
    rc, out, _ = _run(capsys, "verify", path)
    assert rc == 0 and "warning" in out.lower()


def test_module_entry_point(problems_dir):
    proc = subprocess.run([sys.executable, "-m", "briotbouquet", "solve", str(problems_dir / "riccati.txt")],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "u = t" in proc.stdout
