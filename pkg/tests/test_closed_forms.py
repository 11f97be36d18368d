import sympy as sp
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyRing

from briotbouquet.arith import ParamField, render
from briotbouquet.closed_forms import (EllipticForm, RationalForm, TrigForm, WeierstrassAlgebra,
                                       degenerate_branches, degenerate_check, elliptic_to_trig,
                                       integrate_genus0, integrate_genus1, riccati_derivative)
from briotbouquet.ode import parse_ode
from briotbouquet.verify import verify_exact

from oracles import sym

P = ParamField(["g2", "g3"])


def test_weierstrass_algebra_derivatives():
    alg = WeierstrassAlgebra(P, P.gen("g2"), P.gen("g3"))
    wp, wpp = alg.ring.gens
    assert alg.d(wp) == wpp
    assert alg.d(wpp) == wp ** 2 * 6 - alg.ring(P.gen("g2") / 2)
    # d(wp'^2) must agree with d of the cubic it reduces to
    assert alg.d(alg.reduce(wpp ** 2)) == alg.reduce(wpp * 2 * alg.d(wpp))
    a, b = alg.split(wpp ** 3)
    assert set(a) == set() and set(b) == {0, 1, 3}


def test_riccati_derivative():
    F = ParamField(["k2"])
    ring = PolyRing(["tau"], F.field.to_domain(), grlex)
    tau = ring.gens[0]
    assert riccati_derivative(tau ** 2, F.gen("k2")) == tau * 2 * (ring(F.gen("k2") / 4) - tau ** 2)


def test_kdv_elliptic_solution():
    sub = parse_ode("u1^2 - (2/a)*u0^3 + 20*U4*u0 + 56*a*U6", "a != 0, U4, U6")
    [form] = integrate_genus1(sub, 2)
    assert isinstance(form, EllipticForm)
    assert {i: render(c) for i, c in form.wp_coeffs.items() if c} == {1: "2*a"}
    assert not any(form.wpp_coeffs.values())
    a, U4, U6 = sp.symbols("a U4 U6")
    assert sp.simplify(sym(render(form.g2), U4=U4) - 10 * U4 / a) == 0
    assert sp.simplify(sym(render(form.g3), U6=U6) - 14 * U6 / a) == 0
    assert verify_exact(form, sub).exact_ok
    assert verify_exact(form, parse_ode("u3 - (6/a)*u0*u1", "a != 0")).exact_ok


def test_wp_itself_solves_weierstrass():
    ode = parse_ode("u1^2 - 4*u0^3 + g2*u0 + g3", "g2, g3")
    forms = integrate_genus1(ode, 2)
    assert any(render(f.wp_coeffs.get(1, f.params.zero)) == "1" for f in forms)


def test_degenerate_check_kinds():
    d = P.field(3)
    assert degenerate_check(d ** 2 * 3, -d ** 3).kind == "trigonometric"
    assert degenerate_check(d ** 2 * 3, -d ** 3).d == d
    assert degenerate_check(P.zero, P.zero).kind == "rational"
    assert degenerate_check(P.gen("g2"), P.gen("g3")).kind == "elliptic"


def test_elliptic_to_trig_and_rational():
    F = ParamField(["d"], nonzero=["d"])
    d = F.gen("d")
    wp = EllipticForm(F, {1: F.one}, {}, d ** 2 * 3, -d ** 3)
    trig = elliptic_to_trig(wp)
    assert isinstance(trig, TrigForm)
    assert render(trig.k2) == "6*d"
    weier = parse_ode("u1^2 - 4*u0^3 + 3*d^2*u0 - d^3", F)
    assert verify_exact(trig, weier).exact_ok

    zero = EllipticForm(ParamField(), {1: ParamField().one}, {}, ParamField().zero, ParamField().zero)
    rat_form = elliptic_to_trig(zero)
    assert isinstance(rat_form, RationalForm)
    assert verify_exact(rat_form, parse_ode("u1^2 - 4*u0^3", "")).exact_ok


def test_kdv_degeneration():
    sub = parse_ode("u1^2 - (2/a)*u0^3 + 20*U4*u0 + 56*a*U6", "a != 0, U4, U6")
    [form] = integrate_genus1(sub, 2)
    degs = degenerate_branches(form)
    assert degs
    for name, value, field, trig in degs:
        assert name not in field.names
        assert verify_exact(trig, sub.over(field, {name: value})).exact_ok


def test_genus0_riccati_and_rational():
    ric = parse_ode("u1 + (1/a)*u0^2 + b/a", "a != 0, b")
    forms = integrate_genus0(ric, (1, 0))
    assert any(isinstance(f, TrigForm) and f.render().startswith("u = a*tau") for f in forms)
    for f in forms:
        assert verify_exact(f, ric).exact_ok

    [t] = [f for f in integrate_genus0(parse_ode("u1 + u0^2", ""), (1, 0))]
    assert isinstance(t, RationalForm) and t.render().startswith("u = t")


def test_tanh_ratio_ansatz_finds_both_normalizations(tanh_ratio):
    forms = integrate_genus0(tanh_ratio, (1, 2))
    texts = {f.render() for f in forms}
    assert len(forms) == 2, texts
    for f in forms:
        assert render(f.k2) == "4"
        assert verify_exact(f, tanh_ratio).exact_ok
