import time
from pathlib import Path

import pytest

from briotbouquet.ode import parse_ode
from briotbouquet.pipeline import load_problem, solve
from briotbouquet.singular import laurent_expand, leading_orders

PROBLEMS = Path(__file__).resolve().parents[1] / "problems"

KS_TEXT = "nu*u3 + b*u2 + mu*u1 + (1/2)*u0^2 + A"
KS_PARAMS = "nu != 0, b, mu, A"
KDV_TEXT = "u3 - (6/a)*u0*u1"
TANH_RATIO_TEXT = "2*u1^2 + (24*u0^2-3)*u1 + 72*u0^4 - 17*u0^2 + 1"


@pytest.fixture(scope="session")
def problems_dir():
    return PROBLEMS


@pytest.fixture(scope="session")
def ks():
    return parse_ode(KS_TEXT, KS_PARAMS)


@pytest.fixture(scope="session")
def kdv():
    return parse_ode(KDV_TEXT, "a != 0")


@pytest.fixture(scope="session")
def tanh_ratio():
    return parse_ode(TANH_RATIO_TEXT)


@pytest.fixture(scope="session")
def ks_series(ks):
    return laurent_expand(leading_orders(ks)[0], ks, 26)


@pytest.fixture(scope="session")
def kdv_series(kdv):
    return laurent_expand(leading_orders(kdv)[0], kdv, 15)


def _timed_solve(name):
    start = time.perf_counter()
    report = solve(load_problem(str(PROBLEMS / name)))
    return report, time.perf_counter() - start


@pytest.fixture(scope="session")
def ks_run():
    """KS solve report and its wall time (the expensive fixture, computed once)."""
    return _timed_solve("ks.txt")


@pytest.fixture(scope="session")
def kdv_run():
    return _timed_solve("kdv.txt")


@pytest.fixture(scope="session")
def tanh_ratio_run():
    return _timed_solve("rational.txt")


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance verdicts, one line per criterion."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid or rep.when != "call":
                continue
            name = nodeid.split("::test_criterion_")[1]
            number, _, title = name.partition("_")
            verdict = "PASS" if outcome == "passed" else "FAIL"
            lines.append((int(number), f"{verdict} criterion {number}: {title.replace('_', ' ')}"))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
    terminalreporter.write_line("NOT REPRODUCED: CGL3/CGL5 travelling waves "
                                "(multi-component reductions are out of scope)")
