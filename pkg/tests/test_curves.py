import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import QQ

from briotbouquet.curves import PlaneCurve, genus, genus_report, homography, is_briot_bouquet_shape
from briotbouquet.ode import parse_ode

KDV_CURVE = "u1^2 - 2*u0^3 + 40*u0 + 168"
TANH_RATIO = "2*u1^2 + (24*u0^2-3)*u1 + 72*u0^4 - 17*u0^2 + 1"


@pytest.mark.parametrize("text, g", [
    ("u1^2 - u0^3", 0),                  # cusp
    ("u1^2 - u0^2*(u0 + 1)", 0),         # node
    ("u1^2 + u0^2 - 1", 0),
    ("u1 - u0^2", 0),
    ("u1^3 + u0^4", 0),
    ("u1^2 - 4*u0^3 + u0", 1),
    ("u1^2 - u0^4 + 1", 1),              # singular point at infinity
    ("u1^3 - u0^3 + 1", 1),
    ("u1^4 + u0^4 - 1", 3),
    (KDV_CURVE, 1),
    (TANH_RATIO, 0),
])
def test_genus_examples(text, g):
    assert genus(PlaneCurve.parse(text)) == g


def test_genus_report_lists_singularities():
    rep = genus_report(PlaneCurve.parse("u1^2 - u0^2*(u0 + 1)"))
    assert rep.degree == 3
    assert [(p.multiplicity, p.delta) for p in rep.singular_points if not p.at_infinity] == [(2, 1)]


def test_from_subeq_specializes_parameters():
    sub = parse_ode("u1^2 - (2/a)*u0^3 + 20*U4*u0 + 56*a*U6", "a != 0, U4, U6")
    curve = PlaneCurve.from_subeq(sub, {"a": QQ(1), "U4": QQ(2), "U6": QQ(3)})
    assert curve == PlaneCurve.parse(KDV_CURVE)


def test_zero_polynomial_rejected():
    with pytest.raises(ValueError):
        PlaneCurve.parse("u1 - u1")


def test_homography_rejects_singular_matrix():
    poly = PlaneCurve.parse(KDV_CURVE).poly
    with pytest.raises(ValueError):
        homography(poly, QQ(1), QQ(2), QQ(2), QQ(4))


q = st.fractions(min_value=-9, max_value=9, max_denominator=6)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([KDV_CURVE, TANH_RATIO]), q, q, q, q)
def test_homographies_preserve_shape_and_genus(text, alpha, beta, gamma, delta):
    if alpha * delta == beta * gamma:
        return
    curve = PlaneCurve.parse(text)
    coeffs = [QQ(x.numerator, x.denominator) for x in (alpha, beta, gamma, delta)]
    image = homography(curve.poly, *coeffs)
    assert is_briot_bouquet_shape(image, 2)
    assert image.degree(1) == 2
    assert genus(PlaneCurve(image)) == genus(curve)
