import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from briotbouquet.arith import ParamField
from briotbouquet.errors import (NonAutonomousError, OdeSyntaxError, TruncationTooShort,
                                 UndeclaredSymbolError)
from briotbouquet.ode import parse_ode, parse_params, substitute_series, total_derivative
from briotbouquet.series import LaurentSeries

from oracles import sym

KS = "nu*u3 + b*u2 + mu*u1 + (1/2)*u0^2 + A"


def test_parse_ks():
    ode = parse_ode(KS, "nu != 0, b, mu, A")
    assert ode.order == 3
    assert ode.params.names == ("nu", "b", "mu", "A")
    assert ode.params.nonzero == {"nu"}
    nu, b, mu, A, u0, u1 = sp.symbols("nu b mu A u0 u1")
    u2, u3 = sp.symbols("u2 u3")
    assert sp.expand(sym(ode.render(), u2=u2, u3=u3) - (nu * u3 + b * u2 + mu * u1 + u0 ** 2 / 2 + A)) == 0


def test_double_star_and_caret_agree():
    assert parse_ode("u0**3 - u1", "") == parse_ode("u0^3 - u1", "")


def test_coefficients_may_be_rational_functions():
    ode = parse_ode("u3 - (6/a)*u0*u1", "a != 0")
    assert ode.render() in {"u3 - (6/a)*u0*u1", "-(6/a)*u0*u1 + u3"}


@pytest.mark.parametrize("text, decl, exc", [
    ("u2 + x*u0", "", NonAutonomousError),
    ("u2 + c*u0", "", UndeclaredSymbolError),
    ("u2 + 0.5*u0", "", OdeSyntaxError),
    ("u2 + (u0", "", OdeSyntaxError),
    ("u0 - u0", "", OdeSyntaxError),
    ("a + 1", "a", OdeSyntaxError),
    ("u13 + u0", "", OdeSyntaxError),
    ("u1/u0", "", OdeSyntaxError),
])
def test_parse_errors(text, decl, exc):
    with pytest.raises(exc):
        parse_ode(text, decl)


def test_syntax_error_reports_position():
    with pytest.raises(OdeSyntaxError) as info:
        parse_ode("u2 + 3*$u0", "")
    assert info.value.position == 7
    assert info.value.to_dict()["error"] == "syntax_error"


def test_bad_parameter_declarations():
    with pytest.raises(OdeSyntaxError):
        parse_params("u0, b")
    with pytest.raises(OdeSyntaxError):
        parse_params("nu == 0")


def test_render_round_trip_examples():
    for text, decl in [(KS, "nu != 0, b, mu, A"),
                       ("u3 - (6/a)*u0*u1", "a != 0"),
                       ("2*u1^2 + (24*u0^2-3)*u1 + 72*u0^4 - 17*u0^2 + 1", ""),
                       ("(b^2 - 16*mu*nu)/(76*nu)*u0 + u1^3", "nu != 0, b, mu")]:
        ode = parse_ode(text, decl)
        assert parse_ode(ode.render(), ode.params) == ode


def test_total_derivative_of_first_integral():
    # d/dxi of u1^2/2 - u0^3/a equals u1*(u2 - 3u0^2/a)
    ode = parse_ode("(1/2)*u1^2 - (1/a)*u0^3", "a != 0")
    d = total_derivative(ode)
    assert d == parse_ode("u1*u2 - (3/a)*u0^2*u1", "a != 0")


def test_substitute_series_on_exact_solution():
    # u = 1/chi solves u' + u^2 = 0 exactly
    ode = parse_ode("u1 + u0^2", "")
    field = ode.params.field
    s = LaurentSeries.monomial(1, -1, field)
    assert substitute_series(ode, s).is_zero_through(20)


def test_substitute_series_truncation_guard():
    ode = parse_ode("u1 + u0^2", "")
    field = ode.params.field
    s = LaurentSeries(-1, [field.one, field.zero], 0, field)
    assert substitute_series(ode, s, -1).is_zero_through(-1)
    with pytest.raises(TruncationTooShort):
        substitute_series(ode, s, 3)


coeffs = st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=5), min_size=3, max_size=6)


@settings(max_examples=40, deadline=None)
@given(coeffs, coeffs, st.fractions(min_value=-3, max_value=3, max_denominator=4))
def test_substitute_series_is_linear_for_linear_odes(c1, c2, lam):
    params = ParamField()
    ode = parse_ode("u3 - 2*u1 + (1/3)*u0", params)
    field = params.field
    n = min(len(c1), len(c2))
    s1 = LaurentSeries(-2, [field(x) for x in c1[:n]], -2 + n - 1, field)
    s2 = LaurentSeries(-2, [field(x) for x in c2[:n]], -2 + n - 1, field)
    combo = LaurentSeries(-2, [field(x) + field(lam) * field(y) for x, y in zip(c1[:n], c2[:n])],
                          -2 + n - 1, field)
    lhs = substitute_series(ode, combo)
    r1, r2 = substitute_series(ode, s1), substitute_series(ode, s2)
    for e in range(lhs.offset, lhs.last + 1):
        assert lhs.coeff(e) == r1.coeff(e) + field(lam) * r2.coeff(e)
