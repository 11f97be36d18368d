import dataclasses
import random

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from briotbouquet.arith import ParamField
from briotbouquet.closed_forms import integrate_genus0, integrate_genus1
from briotbouquet.errors import AllPointsSingular
from briotbouquet.ode import parse_ode
from briotbouquet.subeq import SubeqTemplate, assemble_system, solve_branches
from briotbouquet.verify import (NUMERIC_TOL, sample_parameters, verify_exact, verify_numeric,
                                 verify_subeq_consequence, wp_eval)

KDV_SUB = "u1^2 - (2/a)*u0^3 + 20*U4*u0 + 56*a*U6"


def _wp_from_sn(e1, e2, e3, z):
    """wp through Jacobi sn for real roots e1 > e2 > e3 (independent of wp_eval)."""
    s = mpmath.sqrt(e1 - e3)
    m = (e2 - e3) / (e1 - e3)
    return e3 + (e1 - e3) / mpmath.ellipfun("sn", s * z, m=m) ** 2


def test_wp_matches_jacobi_representation():
    with mpmath.workdps(40):
        e1, e2 = mpmath.mpf(2), mpmath.mpf("0.5")
        e3 = -e1 - e2
        g2 = -4 * (e1 * e2 + e1 * e3 + e2 * e3)
        g3 = 4 * e1 * e2 * e3
        for z in (mpmath.mpf("0.2"), mpmath.mpc("0.4", "0.3"), mpmath.mpc("-0.9", "0.1")):
            wp, _ = wp_eval(g2, g3, z)
            ref = _wp_from_sn(e1, e2, e3, z)
            assert abs(wp - ref) < mpmath.mpf(10) ** -20 * max(1, abs(ref))


def test_wp_near_origin():
    with mpmath.workdps(50):
        for z in (mpmath.mpf("1e-3"), mpmath.mpc("1e-4", "2e-4")):
            wp, dwp = wp_eval(1, mpmath.mpf(1) / 3, z)
            assert abs(wp * z ** 2 - 1) < 1e-5
            assert abs(dwp * z ** 3 + 2) < 1e-5


def test_wp_coth_degeneracy():
    with mpmath.workdps(50):
        for d in (mpmath.mpf(1), mpmath.mpf(-2), mpmath.mpf(1) / 3):
            for x in (mpmath.mpf("0.37"), mpmath.mpc("0.8", "-0.25")):
                wp, _ = wp_eval(3 * d ** 2, -d ** 3, x)
                ref = -d + 1.5 * d * mpmath.coth(mpmath.sqrt(1.5 * d) * x) ** 2
                assert abs(wp - ref) < 1e-20 * max(1, abs(ref))


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_wp_satisfies_weierstrass_relation(g2, g3, x, y):
    z = mpmath.mpc(x, y)
    if abs(z) < 1e-3:
        return
    with mpmath.workdps(50):
        try:
            wp, dwp = wp_eval(g2, g3, z)
        except ZeroDivisionError:
            return          # landed on a lattice point
        rel = abs(dwp ** 2 - (4 * wp ** 3 - g2 * wp - g3)) / max(abs(dwp) ** 2, abs(wp) ** 3, 1)
        assert rel < 1e-20


def test_sample_parameters_are_nonzero_and_seeded():
    P = ParamField(["a", "b"])
    s1 = sample_parameters(P, random.Random(3))
    s2 = sample_parameters(P, random.Random(3))
    assert s1 == s2 and all(v != 0 for v in s1.values())
    assert sample_parameters(P, random.Random(3), {"a": 2})["a"] == 2


def test_numeric_check_of_elliptic_and_trig_forms(tanh_ratio):
    sub = parse_ode(KDV_SUB, "a != 0, U4, U6")
    [form] = integrate_genus1(sub, 2)
    rep = verify_numeric(form, parse_ode("u3 - (6/a)*u0*u1", "a != 0"), seed=4)
    assert rep.numeric_max_residual < NUMERIC_TOL and len(rep.sample_points) == 20
    for f in integrate_genus0(tanh_ratio, (1, 2)):
        rep = verify_numeric(f, tanh_ratio, seed=1)
        assert rep.numeric_max_residual < NUMERIC_TOL


def test_tampered_forms_fail_both_checks():
    sub = parse_ode(KDV_SUB, "a != 0, U4, U6")
    [form] = integrate_genus1(sub, 2)
    bad = dataclasses.replace(form, wp_coeffs={1: form.wp_coeffs[1] * 2})
    ex = verify_exact(bad, sub)
    assert not ex.exact_ok and ex.exact_remainder not in ("", "0")
    assert verify_numeric(bad, sub, seed=2).numeric_max_residual > 1e-3


def test_tampered_subequation_reports_first_failing_row(kdv_series):
    template = SubeqTemplate.for_families([kdv_series])
    [branch] = solve_branches(assemble_system(template, [kdv_series])).branches
    coeffs = dict(branch.coefficients)
    coeffs[(1, 0)] = coeffs[(1, 0)] + branch.params.one
    rep = verify_subeq_consequence(dataclasses.replace(branch, coefficients=coeffs),
                                   template, [kdv_series])
    assert not rep.exact_ok
    assert rep.first_failure.startswith("family 1: F_4 = ")


def test_all_points_singular_when_nothing_is_finite():
    ode = parse_ode("u1 + u0^2", "")
    [form] = integrate_genus0(ode, (1, 0))
    with pytest.raises(AllPointsSingular) as info:
        verify_numeric(dataclasses.replace(form, numerator=form.numerator * 10 ** 15), ode,
                       n_points=5, max_attempts=5)
    assert info.value.to_dict()["seed"] == 0

