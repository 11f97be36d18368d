import pytest
import sympy as sp

from briotbouquet.errors import OdeSyntaxError
from briotbouquet.ode import parse_ode
from briotbouquet.pipeline import default_terms
from briotbouquet.singular import laurent_expand, leading_orders, resonance_names
from briotbouquet.subeq import (SubeqTemplate, assemble_system, elliptic_order, parse_scalings,
                                select_rows, solve_branches, verify_branch)

from oracles import same_up_to_constant, sym

nu, b, mu, A = sp.symbols("nu b mu A")
KS_SCALING = "x = b^2/(mu*nu), y = nu*A/mu^3, z = nu*k^2/mu"


@pytest.fixture(scope="module")
def ks_result(ks, ks_series):
    template = SubeqTemplate.for_families([ks_series])
    system = assemble_system(template, [ks_series], default_terms(3))
    return template, solve_branches(system, parse_scalings(KS_SCALING, ks.params), 0,
                                    verify_families=[ks_series])


def test_elliptic_orders(ks_series, kdv_series):
    assert elliptic_order([ks_series]) == (3, 4)
    assert elliptic_order([kdv_series]) == (2, 3)


def test_templates_have_briot_bouquet_shape(ks_series, kdv_series):
    kdv_t = SubeqTemplate.for_families([kdv_series])
    assert len(kdv_t.unknowns) == 6
    assert set(kdv_t.monomials) == {(0, 2), (0, 1), (1, 1), (0, 0), (1, 0), (2, 0), (3, 0)}
    ks_t = SubeqTemplate.for_families([ks_series])
    assert len(ks_t.unknowns) == 10
    for t in (kdv_t, ks_t):
        assert t.is_briot_bouquet()
        assert t.leading == (0, t.m)


def test_kdv_unique_subequation(kdv_series):
    template = SubeqTemplate.for_families([kdv_series])
    res = solve_branches(assemble_system(template, [kdv_series]))
    assert res.gcd is None or not res.residuals
    [branch] = res.branches
    assert branch.constraints == []
    U4, U6, a = sp.symbols("U4 U6 a")
    u0, u1 = sp.symbols("u0 u1")
    got = sym(branch.subeq.render(), U4=U4, U6=U6)
    assert sp.simplify(got - (u1 ** 2 - 2 / a * u0 ** 3 + 20 * U4 * u0 + 56 * a * U6)) == 0


def test_ks_cramer_rows_and_gcd(ks_result):
    _, res = ks_result
    assert [j for _, j in res.rows_used] == [0, 1, 2, 3, 4, 5, 6, 8, 9, 12]
    assert res.generic_rank == 10
    assert same_up_to_constant(sym(str(res.gcd).replace("**", "^")), b ** 2 - 16 * mu * nu)
    assert res.unresolved == [] and res.rejected == []


def test_ks_branches(ks_result, ks_series):
    template, res = ks_result
    kinds = [br.kind for br in res.branches]
    assert kinds == ["gcd"] + ["quotient"] * 4
    points = sorted((br.scaled_values["x"], br.scaled_values.get("y")) for br in res.branches[1:])
    assert [(sp.Rational(str(x)), sp.Rational(str(y))) for x, y in points] == [
        (0, sp.Rational(-4950, 6859)), (0, sp.Rational(450, 6859)),
        (sp.Rational(144, 47), sp.Rational(-1800, 103823)), (sp.Rational(256, 73), sp.Rational(-4050, 389017))]
    for br in res.branches:
        ok, n, fail = verify_branch(br, template, [ks_series])
        assert ok and n == ks_series.terms, fail


def test_rank_stable_when_rows_grow(ks_series, kdv_series):
    for lf, m in ((ks_series, 3), (kdv_series, 2)):
        template = SubeqTemplate.for_families([lf])
        J = default_terms(m)
        ranks = {len(select_rows(assemble_system(template, [lf], JJ), 0))
                 for JJ in (J, min(J + 4, lf.terms))}
        assert ranks == {len(template.unknowns)}


def test_mkdv_both_families_and_one():
    ode = parse_ode("a^2*u2 - 2*u0^3 - 2*b*u0", "a != 0, b")
    fams = leading_orders(ode)
    both = [laurent_expand(f, ode, 15, names=resonance_names([4], str(i + 1)))
            for i, f in enumerate(fams)]
    assert [name for lf in both for _, name in lf.resonance_syms] == ["U4_1", "U4_2"]
    t2 = SubeqTemplate.for_families(both)
    assert t2.m == 2
    res2 = solve_branches(assemble_system(t2, both, default_terms(2)), verify_families=both)
    [br] = res2.branches
    assert br.kind == "gcd"
    assert br.subeq.poly.degree(1) == 2

    one = [laurent_expand(fams[1], ode, 10)]
    t1 = SubeqTemplate.for_families(one)
    assert t1.m == 1
    res1 = solve_branches(assemble_system(t1, one, default_terms(1)), verify_families=one)
    [br] = res1.branches
    assert len(br.constraints) == 1
    U4, a = sp.symbols("U4 a")
    assert same_up_to_constant(sym(br.render_constraints()[0].split(" = ")[0], U4=U4),
                               45 * a ** 3 * U4 + b ** 2)


def test_parse_scalings(ks):
    sc = parse_scalings(KS_SCALING, ks.params)
    assert [s.name for s in sc] == ["x", "y", "z"]
    assert [s.uses_k for s in sc] == [False, False, True]
    with pytest.raises(OdeSyntaxError):
        parse_scalings("x b^2", ks.params)
    with pytest.raises(OdeSyntaxError):
        parse_scalings("nu = b", ks.params)
