from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from briotbouquet.arith import (ParamField, bareiss_solve, factor_limited, gcd_many, mpoly_gcd,
                                rat, render, roots_in_variable, substitute)
from briotbouquet.errors import DivisionByZeroDenominator

F = ParamField(["nu", "b", "mu"], nonzero=["nu"])
nu, b, mu = (F.gen(n) for n in ("nu", "b", "mu"))

small = st.integers(min_value=-6, max_value=6)
fracs = st.fractions(min_value=-10, max_value=10, max_denominator=9)


@st.composite
def polys(draw, max_terms=4):
    terms = draw(st.lists(st.tuples(small, st.integers(0, 2), st.integers(0, 2), st.integers(0, 2)),
                          min_size=1, max_size=max_terms))
    out = F.ring.zero
    for c, i, j, k in terms:
        out += F.ring(c) * F.ring.gens[0] ** i * F.ring.gens[1] ** j * F.ring.gens[2] ** k
    return out


@st.composite
def fractions_of(draw):
    num = draw(polys())
    den = draw(polys())
    if not den:
        den = F.ring.one
    return F.field.new(num) / F.field.new(den)


def test_rat_coercions():
    assert rat("3/4") == rat(Fraction(3, 4)) == rat(0.75)
    assert rat(-2) == rat("-2")


def test_parse_and_render_round_trip():
    x = F.parse("(b^2 - 16*mu*nu)/(76*nu)")
    assert F.parse(render(x)) == x
    assert render(F.parse("0")) == "0"


def test_extend_and_without_keep_nonzero_flags():
    G = F.extend(["U4"], origin="resonance")
    assert G.names[-1] == "U4" and G.origins["U4"] == "resonance"
    assert G.nonzero == {"nu"}
    assert G.without(["U4"]) == F


def test_substitute_specializes_and_detects_zero_denominator():
    x = b ** 2 / (nu * mu)
    G = ParamField(["nu", "b"], nonzero=["nu"])
    assert render(substitute(x, F, G, {"mu": G.parse("b^2/(16*nu)")})) == "16"
    with pytest.raises(DivisionByZeroDenominator):
        substitute(x, F, G, {"mu": G.zero})


def test_gcd_of_known_product():
    g = (b.numer ** 2 - 16 * mu.numer * nu.numer)
    p = g * (b.numer + 1)
    q = g * (mu.numer - 3) ** 2
    assert mpoly_gcd(p, q).monic() == g.monic()
    assert gcd_many([p, q, g * 7]).monic() == g.monic()


def test_factor_limited_example():
    p = (2 * b.numer - mu.numer) ** 2 * (nu.numer ** 2 + mu.numer ** 2 + 1) * 6
    fz = factor_limited(p)
    assert fz.expand() == p
    assert [f.multiplicity for f in fz.factors if not f.flagged] == [2]
    assert len(fz.flagged) == 1


def test_roots_in_variable():
    p = (b.numer * nu.numer - mu.numer) * (b.numer ** 2 + 1)
    roots, unresolved = roots_in_variable(p, 1)
    assert [render(r) for r, _ in roots] == ["mu/nu"]
    assert len(unresolved) == 1


def test_bareiss_square_system():
    A = [[F.one, F.one], [F.one, -F.one]]
    rhs = [b, mu]
    res = bareiss_solve(A, rhs)
    assert res.rank == 2 and not res.residuals
    assert res.solution == [(b + mu) / 2, (b - mu) / 2]


def test_bareiss_overdetermined_reports_residual():
    A = [[F.one], [nu]]
    res = bareiss_solve(A, [b, mu])
    assert res.rank == 1
    assert len(res.residuals) == 1
    assert res.residuals[0].monic() == (nu.numer * b.numer - mu.numer).monic()


@settings(max_examples=40, deadline=None)
@given(fractions_of(), fractions_of(), fractions_of())
def test_field_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    if y:
        assert (x / y) * y == x


@settings(max_examples=40, deadline=None)
@given(polys(), polys(), polys())
def test_gcd_divides(p, q, r):
    g = mpoly_gcd(p * r, q * r)
    if g:
        assert (p * r).rem(g) == 0 and (q * r).rem(g) == 0
    if r:
        assert g.rem(r) == 0 or not g


@settings(max_examples=40, deadline=None)
@given(fractions_of())
def test_render_parse_round_trip(x):
    assert F.parse(render(x)) == x


@settings(max_examples=30, deadline=None)
@given(st.lists(st.lists(fracs, min_size=3, max_size=3), min_size=2, max_size=4),
       st.lists(fracs, min_size=4, max_size=4))
def test_bareiss_solution_satisfies_consistent_rows(rows, rhs_vals):
    A = [[F(c) + F(c) * mu for c in row] for row in rows]
    rhs = [F(v) for v in rhs_vals[:len(rows)]]
    res = bareiss_solve(A, rhs)
    bad = set(res.residual_rows)
    for i, row in enumerate(A):
        lhs = sum((a * x for a, x in zip(row, res.solution)), F.zero)
        if i not in bad:
            assert lhs == rhs[i]
    for vec in res.nullspace:
        for row in A:
            assert sum((a * x for a, x in zip(row, vec)), F.zero) == 0
