from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_force_regular, fraction_rank
from ozva.funspaces import (
    FunSpace, PoleMap, assemble, average, components_by_partition, enumerate_regular_matrices,
    factor_indecomposables, group_closure, indecomposable_part, is_admissible, partition_key, pole_data,
    prescribe_poles, reconstruct_from_parts, regular_kernel, rho_reduced, space_basis, symmetrize,
)
from ozva.ratfun import RatFun, lincomb

D = RatFun.diff
EXPECTED = {(2, "admissible"): 1, (3, "admissible"): 1, (4, "admissible"): 6,
            (4, "indecomposable"): 3, (5, "admissible"): 26, (5, "indecomposable"): 16}


def combo(space: FunSpace, coeffs) -> RatFun:
    return lincomb([(c, b) for c, b in zip(coeffs, space.basis)], space.l)


# -- regular matrices ----------------------------------------------------------------------------

def test_regular_matrices_small():
    assert enumerate_regular_matrices(2).matrices == [((0, -4), (-4, 0))]
    allm2 = tuple(tuple(0 if i == j else -2 for j in range(3)) for i in range(3))
    assert allm2 in enumerate_regular_matrices(3).matrices


def test_regular_matrices_brute_force_l4():
    got = enumerate_regular_matrices(4).matrices
    assert len(got) == len(set(got))
    assert set(got) == brute_force_regular(4)
    for S in got:
        assert all(S[i][i] == 0 and sum(S[i]) == -4 for i in range(4))
        assert all(S[i][j] == S[j][i] >= -4 for i in range(4) for j in range(4) if i != j)


# -- dimensions and membership -------------------------------------------------------------------

@pytest.mark.parametrize("key", sorted(EXPECTED))
def test_dimension_table(key):
    l, kind = key
    sp = space_basis(l, kind)
    assert sp.dim == EXPECTED[key]
    for f in sp.basis:
        assert f.is_homogeneous() and f.degree() == -2 * l
        assert is_admissible(f, indecomposable=(kind == "indecomposable"))


def test_two_point_basis():
    (f,) = space_basis(2, "admissible").basis
    assert FunSpace(2, "admissible", [D(2, 0, 1, -4)]).coords(f) is not None


@pytest.mark.parametrize("l", [3, 4, 5])
def test_pole_bounds(l):
    for f in space_basis(l, "admissible").basis:
        assert all(k >= -4 for _, k in f.diag)
    for f in space_basis(l, "indecomposable").basis:
        assert all(k >= -2 for _, k in f.diag)


@pytest.mark.parametrize("l", [4, 5])
def test_rho_closure(l):
    slots = list(range(l))
    big = space_basis(l, "admissible")
    down1 = space_basis(l - 1, "admissible")
    down2 = space_basis(l - 2, "admissible")
    for f in big.basis:
        for i, j in combinations(slots, 2):
            assert f.rho_coefficient(i, j, -3).is_zero()
            assert down1.contains(rho_reduced(f, slots, i, j, -2)[0])
            assert down2.contains(rho_reduced(f, slots, i, j, -4)[0])


@pytest.mark.parametrize("l", [3, 4])
def test_regular_span_matches_kernel(l):
    spanned = space_basis(l, "regular")
    kernel = FunSpace(l, "regular", regular_kernel(l))
    assert spanned.dim == kernel.dim
    assert all(kernel.contains(f) for f in spanned.basis)


def test_non_admissible_inputs_are_rejected():
    assert not is_admissible(D(3, 0, 1, -4) * D(3, 1, 2, -2))
    assert not is_admissible(D(2, 0, 1, -3))
    with pytest.raises(ValueError):
        factor_indecomposables(D(2, 0, 1, -2))


# -- symmetry ------------------------------------------------------------------------------------

def test_symmetrize_examples():
    r2 = space_basis(2, "admissible")
    assert symmetrize(r2, [(1, 0)]).dim == 1
    r3 = space_basis(3, "admissible")
    assert symmetrize(r3, [(1, 0, 2), (0, 2, 1)]).dim == 1


@pytest.mark.parametrize("gens", [[(1, 0, 2, 3)], [(1, 0, 2, 3), (0, 1, 3, 2)], [(1, 2, 3, 0), (1, 0, 2, 3)]])
def test_symmetrize_matches_projector_rank(gens):
    sp = space_basis(4, "admissible")
    group = group_closure(gens, 4)
    proj = [[sp.coords(average(b, group)).get(k, Fraction(0)) for k in range(sp.dim)] for b in sp.basis]
    inv = symmetrize(sp, gens)
    assert inv.dim == fraction_rank(proj)
    for f in inv.basis:
        for g in group:
            assert f.permute(g) == f


# -- factorization, reconstruction, pole prescription --------------------------------------------

def test_factor_examples():
    f = D(4, 0, 1, -4) * D(4, 2, 3, -4)
    (c, factors), = factor_indecomposables(f)
    assert c == 1 and [blk for blk, _ in factors] == [(0, 1), (2, 3)]
    for g in space_basis(4, "indecomposable").basis:
        (c, factors), = factor_indecomposables(g)
        assert len(factors) == 1


@pytest.mark.parametrize("l", [4, 5])
def test_factor_round_trip_on_basis(l):
    for f in space_basis(l, "admissible").basis:
        ex = factor_indecomposables(f)
        assert assemble(l, ex) == f
        for _, factors in ex:
            for blk, h in factors:
                assert is_admissible(h, indecomposable=True)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=3), min_size=6, max_size=6))
def test_factor_round_trip_random(coeffs):
    f = combo(space_basis(4, "admissible"), coeffs)
    assert assemble(4, factor_indecomposables(f)) == f


def _parts(f: RatFun) -> dict:
    comps = components_by_partition(f)
    comps[partition_key([range(f.nvars)])] = indecomposable_part(f)
    return comps


def test_reconstruct_examples():
    f = D(4, 0, 1, -4) * D(4, 2, 3, -4)
    assert reconstruct_from_parts(components_by_partition(f), 4) == f
    zero = {k: RatFun.zero(4) for k in components_by_partition(f)}
    assert reconstruct_from_parts(zero, 4).is_zero()


@pytest.mark.parametrize("l", [4, 5])
def test_reconstruct_round_trip(l):
    ind = space_basis(l, "indecomposable")
    for f in space_basis(l, "admissible").basis:
        assert reconstruct_from_parts(_parts(f), l) == f
        assert ind.contains(indecomposable_part(f))


def test_reconstruct_rejects_incoherent_components():
    f = D(4, 0, 1, -4) * D(4, 2, 3, -4)
    mixed = components_by_partition(f)
    # a function split along {0,2}|{1,3} filed under {0,1}|{2,3}
    mixed[partition_key([(0, 1), (2, 3)])] = D(4, 0, 2, -4) * D(4, 1, 3, -4)
    with pytest.raises(ValueError):
        reconstruct_from_parts(mixed, 4)


def test_prescribe_zero_data():
    out = prescribe_poles(4, {})
    assert pole_data(out) == {}
    assert all(pole_data(g) == {} for g in PoleMap(space_basis(4, "admissible")).kernel())


@pytest.mark.parametrize("l", [4, 5])
def test_prescribe_round_trip(l):
    sp = space_basis(l, "admissible")
    pm = PoleMap(sp)
    datas = [pole_data(f) for f in sp.basis]
    for data, g in zip(datas, pm.solve_many(datas)):
        assert g is not None and pole_data(g) == data


def test_prescribe_rejects_incompatible_data():
    data = {(0, 1, -4): D(2, 0, 1, -4), (2, 3, -4): D(2, 0, 1, -4).scale(2)}
    with pytest.raises(ValueError):
        prescribe_poles(4, data)


def test_prescribe_random_combination():
    sp = space_basis(4, "admissible")
    f = combo(sp, [Fraction(k, 3) - 1 for k in range(6)])
    g = prescribe_poles(4, pole_data(f), sp)
    assert pole_data(g) == pole_data(f)
