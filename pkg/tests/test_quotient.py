from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from oracles import fraction_rank, verma_gram_ranks
from ozva.exactlinalg import independent_subset
from ozva.quotient import (
    CharacterError, apply_word, augmentation_character, automorphism_check, creation_words, form, gram_block,
    is_gram_symmetric, load_character, monomial_star, quotient_piece, simple_quotient_dims, weight_words,
    word_degree, word_gram,
)
from ozva.vertexbuild import CutoffError

letters = st.tuples(st.integers(0, 3), st.integers(-5, 5))


@pytest.fixture(scope="module")
def vir_chi(vir_tower):
    return augmentation_character(vir_tower)


@pytest.fixture(scope="module")
def two_chi(two_tower):
    return augmentation_character(two_tower)


def test_monomial_star_examples():
    assert monomial_star([(0, -1)]) == ((0, 3),)
    assert monomial_star([(0, -1), (1, 0)]) == ((1, 2), (0, 3))
    assert monomial_star([]) == ()


@given(st.lists(letters, max_size=5))
def test_monomial_star_is_an_involution(word):
    assert monomial_star(monomial_star(word)) == tuple(word)
    assert word_degree(monomial_star(word)) == -word_degree(word)


def test_creation_words():
    assert creation_words(1, 0) == [()]
    assert creation_words(1, 1) == []
    assert creation_words(1, 2) == [((0, -1),)]
    assert creation_words(2, 4) == sorted([((0, -3),), ((1, -3),), ((0, -1), (0, -1)), ((0, -1), (1, -1)),
                                          ((1, -1), (0, -1)), ((1, -1), (1, -1))])
    for w in creation_words(2, 6):
        assert word_degree(w) == 6 and all(m <= -1 for _, m in w)


def test_weight_words_reach_the_piece():
    for w in weight_words((0, 1), 4, 6):
        assert sorted(a for a, _ in w) == [0, 1]
        assert word_degree(w) == 4


def test_basic_pairings(two_T, two_chi, two_alg):
    unit = two_T.unit()
    assert form(two_T, two_chi, (), unit) == 1
    gens = two_T.gens
    for a in range(gens.size):
        for b in range(gens.size):
            assert form(two_T, two_chi, ((a, -1),), two_T.generator_state(b)) == gens.form[a][b]
    w = gens.omega
    assert form(two_T, two_chi, ((w, -1),), two_T.omega_state()) == two_alg.central_charge() / 2


def test_gram_is_symmetric_and_degree_orthogonal(two_T, two_chi):
    for d in range(5):
        words = creation_words(two_T.gens.size, d)
        assert is_gram_symmetric(word_gram(two_T, two_chi, words))
        for d2 in range(5):
            if d2 == d:
                continue
            for u in words:
                for x in creation_words(two_T.gens.size, d2):
                    assert form(two_T, two_chi, u, apply_word(two_T, x, two_T.unit())) == 0


def test_gram_block(two_T, two_chi):
    blk = gram_block(two_T, two_chi, (0,), (0,), 2)
    assert blk.matrix == [[two_T.gens.form[0][0]]]
    assert blk.to_json()["degree"] == 2
    with pytest.raises(CutoffError):
        gram_block(two_T, two_chi, (0, 0, 0), (0, 0), 6)


def test_two_dim_quotient(two_T, two_chi):
    assert [dim for _, _, dim in simple_quotient_dims(two_T, two_chi, 4)] == [1, 0, 2, 2, 5]


def test_virasoro_quotient_matches_verma_form(vir_T, vir_chi):
    got = [dim for _, _, dim in simple_quotient_dims(vir_T, vir_chi, 4)]
    assert got == verma_gram_ranks(10, 4) == [1, 0, 1, 1, 2]


def test_radical_is_an_ideal(two_T, two_chi):
    for d in range(4):
        p = quotient_piece(two_T, two_chi, d)
        assert len(p.radical) == len(p.words) - p.dim
        for r in p.radical_states(two_T):
            for a in range(two_T.gens.size):
                for n in range(-1, d + 2):
                    d2 = d + 1 - n
                    if d2 > 4:
                        continue
                    img = two_T.generator_action(a, n, r)
                    assert all(form(two_T, two_chi, u, img) == 0 for u in creation_words(two_T.gens.size, d2))


def test_quotient_is_nondegenerate(two_T, two_chi):
    for d in range(5):
        p = quotient_piece(two_T, two_chi, d)
        gram = word_gram(two_T, two_chi, p.words)
        rows = [{j: v for j, v in enumerate(r) if v} for r in gram]
        keep = independent_subset(rows)
        assert len(keep) == p.dim
        assert fraction_rank([[gram[i][j] for j in keep] for i in keep]) == p.dim


def test_automorphism_preserves_everything(two_T, two_chi, two_alg):
    (sigma,) = two_alg.automorphisms
    rep = automorphism_check(two_T, two_chi, sigma, 4)
    assert rep["ok"], rep["witnesses"][:3]


def test_non_automorphism_is_detected(two_T, two_chi):
    rep = automorphism_check(two_T, two_chi, [[Fraction(2), 0], [0, 1]], 2)
    assert not rep["ok"]


def test_characters(two_tower):
    chi = augmentation_character(two_tower)
    assert not chi.multiplicativity_defects()
    assert load_character(two_tower, {"families": ["1"]}).coefficients == chi.coefficients
    with pytest.raises(CharacterError):
        load_character(two_tower, {"families": ["2"]})
    with pytest.raises(CharacterError):
        load_character(two_tower, {"families": ["1"] * (len(two_tower.families) + 1)})
    assert chi.to_json() == {"families": ["1"] + ["0"] * (len(two_tower.families) - 1)}


def test_quotient_needs_cutoffs(two_T, two_chi):
    with pytest.raises(CutoffError):
        quotient_piece(two_T, two_chi, 5)
