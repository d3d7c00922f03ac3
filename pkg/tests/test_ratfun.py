from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from ozva.funspaces import enumerate_regular_matrices, is_admissible, ordered_partitions, space_basis
from ozva.ratfun import RatFun, lincomb, pi_product

D = RatFun.diff
POINT = [Fraction(3), Fraction(-7, 2), Fraction(11, 5), Fraction(5, 3), Fraction(-13, 7)]


def to_sympy(f: RatFun, syms):
    expr = sum(sympy.Rational(c.numerator, c.denominator) * sympy.Mul(*[s ** e for s, e in zip(syms, exps)])
               for exps, c in f.term_map().items())
    for (a, b), k in f.diag:
        expr *= (syms[a] - syms[b]) ** k
    return expr


def laurent(expr, t, lo: int, hi: int) -> dict[int, object]:
    """Coefficients of t^lo .. t^hi of a univariate rational function at t = 0."""
    s = sympy.series(expr, t, 0, max(hi + 1, 1)).removeO()
    s = sympy.expand(s)
    return {k: sympy.nsimplify(s.coeff(t, k)) for k in range(lo, hi + 1)}


def frac(x) -> Fraction:
    x = sympy.Rational(x)
    return Fraction(int(x.p), int(x.q))


@st.composite
def homogeneous(draw, nvars=None):
    n = nvars or draw(st.integers(2, 4))
    pairs = list(combinations(range(n), 2))
    diag = {p: draw(st.integers(-4, 1)) for p in pairs if draw(st.booleans())}
    pdeg = draw(st.integers(0, 3))
    terms = {}
    for _ in range(draw(st.integers(1, 3))):
        cuts = sorted(draw(st.lists(st.integers(0, pdeg), min_size=n - 1, max_size=n - 1)))
        exps = tuple(b - a for a, b in zip([0] + cuts, cuts + [pdeg]))
        terms[exps] = Fraction(draw(st.integers(-9, 9)), draw(st.integers(1, 5)))
    return RatFun.from_terms(n, terms, diag)


# -- arithmetic and normalization ----------------------------------------------------------------

def test_trivial_arithmetic():
    f = D(2, 0, 1, -4)
    assert f + RatFun.zero(2) == f
    assert f.disjoint_product(f) == D(4, 0, 1, -4) * D(4, 2, 3, -4)
    assert D(2, 0, 1, 1) * f == D(2, 0, 1, -3)


def test_order_at():
    g = D(3, 0, 1, -2) * D(3, 0, 2, -2) * D(3, 1, 2, -2)
    assert g.order_at(0, 1) == -2
    assert (D(2, 0, 1, 1) * D(2, 0, 1, -4)).order_at(0, 1) == -3
    assert D(3, 0, 2, -4).order_at(0, 1) == 0


def test_normalization_cancels_diagonal_factors():
    # (z1^2 - z2^2) (z1 - z2)^-3 = (z1 + z2) (z1 - z2)^-2
    f = RatFun.from_terms(2, {(2, 0): 1, (0, 2): -1}, {(0, 1): -3})
    assert f.order_at(0, 1) == -2
    assert f == RatFun.from_terms(2, {(1, 0): 1, (0, 1): 1}, {(0, 1): -2})


def test_permute_examples():
    assert D(2, 0, 1, -4).permute([1, 0]) == D(2, 0, 1, -4)
    assert D(2, 0, 1, -3).permute([1, 0]) == -D(2, 0, 1, -3)
    f = D(3, 0, 1, -2) * D(3, 0, 2, -1)
    g = f.permute([1, 2, 0])
    assert g == (D(3, 1, 2, -2) * D(3, 0, 1, -1)).scale(-1)
    # direct substitution oracle
    x = POINT[:3]
    assert g.evaluate(x) == f.evaluate([x[1], x[2], x[0]])


@settings(max_examples=40, deadline=None)
@given(homogeneous(), homogeneous(), st.integers(-5, 5))
def test_ring_operations_match_evaluation(f, g, c):
    if f.nvars != g.nvars:
        g = g.embed(max(f.nvars, g.nvars), range(g.nvars))
        f = f.embed(g.nvars, range(f.nvars))
    x = POINT[: f.nvars]
    assert (f + g).evaluate(x) == f.evaluate(x) + g.evaluate(x)
    assert (f * g).evaluate(x) == f.evaluate(x) * g.evaluate(x)
    assert f.scale(c).evaluate(x) == c * f.evaluate(x)
    assert lincomb([(c, f), (1, g)], f.nvars) == f.scale(c) + g


@settings(max_examples=40, deadline=None)
@given(homogeneous())
def test_serialization_round_trip(f):
    assert RatFun.from_json(f.to_json()) == f


@settings(max_examples=30, deadline=None)
@given(homogeneous(nvars=3), st.permutations(range(3)))
def test_permute_matches_substitution(f, sigma):
    x = POINT[:3]
    assert f.permute(sigma).evaluate(x) == f.evaluate([x[s] for s in sigma])


# -- rho coefficients ----------------------------------------------------------------------------

def test_rho_examples():
    beta = D(4, 2, 3, -2) * RatFun.variable(4, 3, 1)
    alpha = D(4, 0, 1, -4) * beta
    # slot 0 is merged into slot 1, which becomes variable 0
    assert alpha.rho_coefficient(0, 1, -4) == D(3, 1, 2, -2) * RatFun.variable(3, 2, 1)
    g = D(3, 0, 1, -2) * D(3, 0, 2, -2) * D(3, 1, 2, -2)
    assert g.rho_coefficient(0, 1, -2) == D(2, 0, 1, -4)


@pytest.mark.parametrize("l", [2, 3, 4, 5])
def test_rho_minus_three_vanishes_on_admissible(l):
    for f in space_basis(l, "admissible").basis:
        for i, j in combinations(range(l), 2):
            assert f.rho_coefficient(i, j, -3).is_zero()


def _embed_back(g: RatFun, l: int, i: int) -> RatFun:
    return g.embed(l, [q for q in range(l) if q != i])


@pytest.mark.parametrize("l", [3, 4])
def test_expansion_completeness(l):
    for f in space_basis(l, "admissible").basis:
        for i, j in combinations(range(l), 2):
            partial = lincomb([(1, D(l, i, j, k) * _embed_back(f.rho_coefficient(i, j, k), l, i))
                               for k in range(-4, 3)], l)
            rest = f - partial
            assert rest.is_zero() or rest.order_at(i, j) >= 3


def test_rho_against_series_oracle():
    z = sympy.symbols("z1:5")
    t = sympy.Symbol("t")
    for f in space_basis(4, "admissible").basis[:3]:
        expr = to_sympy(f, z)
        for i, j in [(0, 1), (1, 3)]:
            rest = [q for q in range(4) if q != i]
            vals = {z[q]: sympy.Rational(str(POINT[q])) for q in rest}
            vals[z[i]] = vals[z[j]] + t
            coeffs = laurent(expr.subs(vals), t, -4, 1)
            for k in range(-4, 2):
                g = f.rho_coefficient(i, j, k)
                assert g.evaluate([POINT[q] for q in rest]) == frac(coeffs[k])


@settings(max_examples=25, deadline=None)
@given(homogeneous(nvars=4), st.integers(-3, 0), st.integers(-3, 0))
def test_rho_commutation(f, k, m):
    # pairs (0,1) and (2,3) are disjoint; removing slot 0 shifts (2,3) to (1,2)
    a = f.rho_coefficient(0, 1, k).rho_coefficient(1, 2, m)
    b = f.rho_coefficient(2, 3, m).rho_coefficient(0, 1, k)
    assert a == b


# -- components ----------------------------------------------------------------------------------

def test_component_examples():
    a = D(4, 0, 1, -4) * D(4, 2, 3, -4)
    assert a.component([0, 1], [2, 3], 0) == a
    assert D(2, 0, 1, -4).component([0], [1], 2) == RatFun.variable(2, 0, -4)
    pairs = a.split_component([0, 1], [2, 3], 0)
    assert len(pairs) == 1
    fi, gj = pairs[0]
    assert fi.embed(4, [0, 1]) * gj.embed(4, [2, 3]) == a


@pytest.mark.parametrize("l", [3, 4])
def test_admissible_components_vanish_below_zero_and_at_one(l):
    for f in space_basis(l, "admissible").basis:
        for I, J in ordered_partitions(l):
            for n in (-2, -1, 1):
                assert f.component(I, J, n).is_zero()


def test_indecomposable_degree_zero_splits_are_empty():
    for f in space_basis(4, "indecomposable").basis:
        for I, J in ordered_partitions(4):
            assert f.split_component(I, J, 0) == []


def test_split_component_sum_check():
    for f in space_basis(4, "admissible").basis:
        for I, J in ordered_partitions(4):
            for n in range(5):
                comp = f.component(I, J, n)
                total = lincomb([(1, fi.embed(4, I) * gj.embed(4, J)) for fi, gj in f.split_component(I, J, n)], 4)
                assert total == comp


def test_component_completeness_against_series():
    z = sympy.symbols("z1:5")
    t = sympy.Symbol("t")
    for f in space_basis(4, "admissible").basis[:2]:
        expr = to_sympy(f, z)
        for I, J in [((0, 1), (2, 3)), ((0,), (1, 2, 3)), ((1, 3), (0, 2))]:
            vals = {z[q]: sympy.Rational(str(POINT[q])) for q in I}
            vals.update({z[q]: t * sympy.Rational(str(POINT[q])) for q in J})
            shift = 2 * len(J)
            coeffs = laurent(expr.subs(vals), t, -shift - 2, 4 - shift)
            for n in range(-2, 5):
                got = f.component(I, J, n).evaluate(POINT[:4])
                assert got == frac(coeffs[n - shift]), (I, J, n)


def test_component_swap_law():
    for f in space_basis(4, "admissible").basis:
        for I, J in ordered_partitions(4):
            for n in range(5):
                assert f.component(J, I, n) == f.component(I, J, n).involution()


# -- differential operators and involution -------------------------------------------------------

def test_apply_delta_examples():
    assert RatFun.const(2, 5).apply_delta().is_zero()
    assert D(2, 0, 1, -4).apply_delta().is_zero()
    assert (RatFun.variable(2, 0) * D(2, 0, 1, -4)).apply_delta() == D(2, 0, 1, -4)


def test_apply_delta_star_examples():
    S = enumerate_regular_matrices(4).matrices
    assert all(pi_product(s).apply_delta_star([4] * 4).is_zero() for s in S)
    assert D(2, 0, 1, -4).apply_delta_star([4, 4]).is_zero()
    f = D(2, 0, 1, -3).apply_delta_star([4, 4])
    assert f == RatFun.from_terms(2, {(1, 0): 1, (0, 1): 1}, {(0, 1): -3})


def test_involution_examples():
    assert D(2, 0, 1, -4).involution([2, 2]) == D(2, 0, 1, -4)
    for f in space_basis(3, "admissible").basis:
        assert f.involution() == f
    g = RatFun.from_terms(2, {(1, 1): 1}, {(0, 1): -4})
    assert g.involution([2, 2]) == RatFun.from_terms(2, {(-1, -1): 1}, {(0, 1): -4})


@settings(max_examples=40, deadline=None)
@given(homogeneous())
def test_involution_is_an_involution(f):
    assert f.involution().involution() == f


@settings(max_examples=40, deadline=None)
@given(homogeneous())
def test_delta_star_delta_duality(f):
    n = f.nvars
    lhs = f.involution().apply_delta_star([4] * n)
    rhs = -(f.apply_delta().involution())
    assert lhs == rhs


@pytest.mark.parametrize("l", [2, 3, 4, 5])
def test_minimal_degree_regular_functions_are_fixed(l):
    for f in space_basis(l, "admissible").basis:
        assert f.degree() == -2 * l
        assert f.apply_delta().is_zero()
        assert f.apply_delta_star([4] * l).is_zero()
        assert f.involution() == f


def test_regular_products_respect_degree_bound():
    for S in enumerate_regular_matrices(4).matrices:
        f = pi_product(S)
        assert f.degree() >= -8
        if f.degree() == -8:
            assert f.apply_delta().is_zero() and f.involution() == f


# -- translation operator ------------------------------------------------------------------------

def test_te_operator_on_two_point_function():
    k = Fraction(7, 3)
    out = D(2, 0, 1, -4).scale(k).te_operator()
    assert out == (D(3, 0, 1, -2) * D(3, 0, 2, -2) * D(3, 1, 2, -2)).scale(2 * k)


@pytest.mark.parametrize("l", [3, 4, 5])
def test_te_operator_pole_identities(l):
    # removing the last slot (keep the i-th variable) gives the identities in their printed form
    for beta in space_basis(l - 1, "admissible").basis:
        alpha = beta.te_operator()
        for i in range(l - 1):
            assert alpha.rho_coefficient(i, l - 1, -2, keep="i") == beta.scale(2)
            assert alpha.rho_coefficient(i, l - 1, -1, keep="i") == -beta.derivative(i)


@pytest.mark.parametrize("l", [3, 4, 5])
def test_te_operator_image_is_admissible(l):
    for beta in space_basis(l - 1, "admissible").basis:
        assert is_admissible(beta.te_operator())


def test_pi_product_examples():
    assert pi_product([[0, -4], [-4, 0]]) == D(2, 0, 1, -4)
    S = [[0 if i == j else -2 for j in range(3)] for i in range(3)]
    assert pi_product(S) == D(3, 0, 1, -2) * D(3, 0, 2, -2) * D(3, 1, 2, -2)
    K = [[0] * 8 for _ in range(8)]
    for i in range(4):
        for j in range(4, 8):
            K[i][j] = K[j][i] = -1
    f = pi_product(K)
    assert f.apply_delta_star([4] * 8).is_zero()
    with pytest.raises(ValueError):
        pi_product([[0, -4], [-3, 0]])
