"""Invariant forms from characters of B_0, Gram matrices and the simple quotient."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, product
from typing import Mapping, Sequence

from .coalgebra import CoalgebraTower, TowerError, format_rational, parse_rational
from .exactlinalg import Coordinates, independent_subset, rank, rref_kernel
from .funspaces import two_block_partitions
from .ratfun import RatFun, lincomb
from .vertexbuild import CutoffError, State, StateVector, VertexTruncation

Word = tuple[tuple[int, int], ...]


class CharacterError(ValueError):
    """A proposed character is not multiplicative (or not normalized)."""


@dataclass
class Character:
    """A linear functional on B_0, given by its coefficients on the families.

    Its correlation function at a word is the matching combination of family
    values; the functional is multiplicative exactly when every degree-zero
    split of those functions factors into the two halves.
    """

    coefficients: list[Fraction]
    tower: CoalgebraTower = field(repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    def function(self, word: Sequence[int]) -> RatFun:
        word = tuple(word)
        hit = self._cache.get(word)
        if hit is None:
            hit = lincomb([(c, self.tower.value(f, word)) for f, c in enumerate(self.coefficients) if c], len(word))
            self._cache[word] = hit
        return hit

    def of_state(self, T: VertexTruncation, x: State) -> Fraction:
        """The value on the degree-zero part of a state."""
        total = Fraction(0)
        for (lam, d), vec in x.parts.items():
            if d:
                continue
            f = self.function(lam) if lam else RatFun.const(0, 1)
            total += T.pair_with(StateVector(lam, d, vec), f)
        return total

    def multiplicativity_defects(self, max_length: int | None = None) -> list[dict]:
        tower = self.tower
        top = tower.length if max_length is None else min(max_length, tower.length)
        bad = []
        if self.function(()) != RatFun.const(0, 1):
            bad.append({"weight": [], "reason": "value on the unit is not 1"})
        for l in range(2, top + 1):
            for lam in tower.weights(l):
                f = self.function(lam)
                seen = set()
                for I, J in two_block_partitions(l):
                    # the function is symmetric in equal letters, so one split per letter pattern suffices
                    pattern = (tuple(lam[q] for q in I), tuple(lam[q] for q in J))
                    if pattern in seen:
                        continue
                    seen.add(pattern)
                    comp = f.component(list(I), list(J), 0)
                    fi = self.function(tuple(lam[q] for q in I)).embed(l, I)
                    fj = self.function(tuple(lam[q] for q in J)).embed(l, J)
                    if comp != fi * fj:
                        bad.append({"weight": list(lam), "split": [list(I), list(J)]})
        return bad

    def to_json(self) -> dict:
        return {"families": [format_rational(c) for c in self.coefficients]}


def augmentation_character(tower: CoalgebraTower, validate: bool = True) -> Character:
    """The character dual to the vacuum family."""
    chi = Character([Fraction(1)] + [Fraction(0)] * (len(tower.families) - 1), tower)
    if validate:
        bad = chi.multiplicativity_defects()
        if bad:
            raise CharacterError("augmentation is not multiplicative: %r" % bad[:3])
    return chi


def load_character(tower: CoalgebraTower, doc: Mapping) -> Character:
    """A user character ``{"families": [p/q, ...]}``; rejected unless normalized and multiplicative."""
    coeffs = [parse_rational(x) for x in doc.get("families", [])]
    if len(coeffs) > len(tower.families):
        raise CharacterError("%d coefficients for %d families" % (len(coeffs), len(tower.families)))
    coeffs += [Fraction(0)] * (len(tower.families) - len(coeffs))
    chi = Character(coeffs, tower)
    bad = chi.multiplicativity_defects()
    if bad:
        raise CharacterError("character is not multiplicative: %r" % bad[:3])
    return chi


# -- words -----------------------------------------------------------------------------------

def monomial_star(word: Sequence[tuple[int, int]]) -> Word:
    """Adjoint of a word of degree-2 generator modes: reverse it and send a(m) to a(2 - m)."""
    return tuple((a, 2 - m) for a, m in reversed(list(word)))


def apply_word(T: VertexTruncation, word: Sequence[tuple[int, int]], x: State) -> State:
    """Apply a word of generator modes to a state, rightmost letter first."""
    for a, n in reversed(list(word)):
        x = T.generator_action(a, n, x)
        if x.is_zero():
            break
    return x


def word_degree(word: Sequence[tuple[int, int]]) -> int:
    return sum(1 - m for _, m in word)


def creation_words(ngens: int, d: int) -> list[Word]:
    """Words ``a_1(n_1) .. a_k(n_k)`` with every n_i <= -1 and total degree d."""
    out = []

    def rec(prefix, left):
        if left == 0:
            out.append(tuple(prefix))
            return
        for step in range(2, left + 1):
            if left - step == 1:
                continue
            for a in range(ngens):
                rec(prefix + [(a, 1 - step)], left - step)

    rec([], d)
    return sorted(out)


def weight_words(lam: Sequence[int], d: int, max_degree: int) -> list[Word]:
    """Words with letters a permutation of lam whose partial states stay in degrees [0, max_degree]."""
    k = len(lam)
    if not k:
        return [()] if d == 0 else []
    out = set()
    for order in set(permutations(lam)):
        for degs in product([e for e in range(max_degree + 1) if e != 1], repeat=k - 1):
            seq = (0,) + degs + (d,)
            # letters act right to left: letter i takes degree seq[k-1-i] to seq[k-i]
            out.add(tuple((order[i], 1 + seq[k - 1 - i] - seq[k - i]) for i in range(k)))
    return sorted(out)


def form(T: VertexTruncation, chi: Character, u: Word, w: State) -> Fraction:
    """``<u, w>`` for a word u and a state w."""
    return chi.of_state(T, apply_word(T, monomial_star(u), w))


# -- Gram blocks -------------------------------------------------------------------------------

@dataclass
class GramBlock:
    left: tuple
    right: tuple
    degree: int
    matrix: list[list[Fraction]]

    def to_json(self) -> dict:
        return {"left": list(self.left), "right": list(self.right), "degree": self.degree,
                "matrix": [[format_rational(x) for x in row] for row in self.matrix]}


def _spanning_words(T: VertexTruncation, lam: tuple, d: int) -> tuple[list[Word], list[dict]]:
    """Words whose states span V^lam_d, with the states' coordinate vectors."""
    dim = T.dim(lam, d)
    words, vecs = [], []
    for wd in weight_words(lam, d, T.D):
        try:
            x = apply_word(T, wd, T.unit())
        except CutoffError:
            continue
        v = x.parts.get((lam, d), {})
        if v:
            words.append(wd)
            vecs.append(v)
    keep = independent_subset(vecs)
    if len(keep) != dim:
        raise TowerError("words span %d of %d dimensions in %r, degree %d" % (len(keep), dim, lam, d))
    return [words[k] for k in keep], [vecs[k] for k in keep]


def gram_block(T: VertexTruncation, chi: Character, lam: Sequence[int], mu: Sequence[int], d: int) -> GramBlock:
    """Pairings between the dual bases of V^lam_d and V^mu_d."""
    lam, mu = tuple(sorted(lam)), tuple(sorted(mu))
    if len(lam) + len(mu) > T.L:
        raise CutoffError("pairing %r with %r needs length %d > %d" % (lam, mu, len(lam) + len(mu), T.L))
    words, vecs = _spanning_words(T, lam, d)
    dim_l, dim_m = T.dim(lam, d), T.dim(mu, d)
    # basis vector u = sum_i M[u][i] * state(words[i])
    coords = Coordinates(vecs)
    M = [coords.coords({u: 1}) for u in range(dim_l)]
    mat = []
    for u in range(dim_l):
        row = []
        for w in range(dim_m):
            x = T.basis_state(mu, d, w)
            row.append(sum((c * form(T, chi, words[i], x) for i, c in M[u].items()), Fraction(0)))
        mat.append(row)
    return GramBlock(lam, mu, d, mat)


def word_gram(T: VertexTruncation, chi: Character, words: Sequence[Word], others: Sequence[Word] | None = None):
    others = words if others is None else others
    states = [apply_word(T, w, T.unit()) for w in others]
    return [[form(T, chi, u, x) for x in states] for u in words]


# -- simple quotient ----------------------------------------------------------------------------

@dataclass
class QuotientPiece:
    degree: int
    words: list[Word]
    spanned: int        # glued dimension of the span of the words within the cutoff
    dim: int            # rank of the Gram matrix: dimension of the simple quotient
    radical: list[dict[int, Fraction]]  # kernel vectors over the words

    @property
    def radical_dim(self) -> int:
        return self.spanned - self.dim

    def radical_states(self, T: VertexTruncation) -> list[State]:
        out = []
        for vec in self.radical:
            x = State()
            for i, c in vec.items():
                x = x + apply_word(T, self.words[i], T.unit()).scale(c)
            out.append(x)
        return out


def _glued_rank(T: VertexTruncation, states: Sequence[State], top: int) -> int:
    vecs = [T.glue_vector(x, top) for x in states]
    keys = {k: p for p, k in enumerate(sorted({k for v in vecs for k in v}, key=repr))}
    return rank([{keys[k]: c for k, c in v.items()} for v in vecs])


def quotient_piece(T: VertexTruncation, chi: Character, d: int) -> QuotientPiece:
    words = creation_words(T.gens.size, d)
    if not words:
        return QuotientPiece(d, [], 0, 0, [])
    if d > T.D or d > T.L:
        raise CutoffError("degree %d needs length and degree cutoffs of at least %d" % (d, d))
    states = [apply_word(T, w, T.unit()) for w in words]
    top = T.L - max(len(w) for w in words)
    spanned = _glued_rank(T, states, top)
    gram = [[form(T, chi, u, x) for x in states] for u in words]
    rows = [{j: v for j, v in enumerate(r) if v} for r in gram]
    r, kernel = rref_kernel(rows, len(words))
    radical = [dict(v) for v in kernel.basis]
    return QuotientPiece(d, words, spanned, r, radical)


def simple_quotient_dims(T: VertexTruncation, chi: Character, d_max: int) -> list[tuple[int, int, int]]:
    """``(d, dim of the glued span, dim of the simple quotient)`` for d = 0..d_max."""
    out = []
    for d in range(d_max + 1):
        p = quotient_piece(T, chi, d)
        out.append((d, p.spanned, p.dim))
    return out


def is_gram_symmetric(matrix: Sequence[Sequence[Fraction]]) -> bool:
    n = len(matrix)
    return all(matrix[i][j] == matrix[j][i] for i in range(n) for j in range(n))


# -- automorphisms ------------------------------------------------------------------------------

def transport_word(T: VertexTruncation, sigma, word: Word) -> list[tuple[Fraction, Word]]:
    """sigma applied letter by letter, as a combination of words over G."""
    gens = T.gens
    images = []
    for g in range(gens.size):
        vec = [sum((Fraction(sigma[r][c]) * gens.vectors[g][c] for c in range(len(sigma))), Fraction(0))
               for r in range(len(sigma))]
        images.append(gens.coords(vec))
    terms = [(Fraction(1), ())]
    for a, m in word:
        terms = [(c * x, w + ((h, m),)) for c, w in terms for h, x in images[a].items()]
    return terms


def transported_state(T: VertexTruncation, sigma, word: Word) -> State:
    out = State()
    for c, w in transport_word(T, sigma, word):
        out = out + apply_word(T, w, T.unit()).scale(c)
    return out


def automorphism_check(T: VertexTruncation, chi: Character, sigma, d_max: int) -> dict:
    """Compare the form and the mode action on the simple quotient before and after transport by sigma.

    Coordinates are taken in the quotient: a state is located by its pairings
    with the spanning words of its degree.
    """
    report = {"form": True, "structure": True, "dims": True, "radical": True, "witnesses": []}
    pieces = {d: quotient_piece(T, chi, d) for d in range(d_max + 1)}
    moved = {}
    for d, p in pieces.items():
        moved[d] = [transported_state(T, sigma, w) for w in p.words]
        gram = [[form(T, chi, u, x) for x in (apply_word(T, w, T.unit()) for w in p.words)] for u in p.words]
        gram_moved = [[_pair_states(T, chi, sigma, u, x) for x in moved[d]] for u in p.words]
        # dims: the transported words span a quotient piece of the same dimension
        if gram != gram_moved:
            report["form"] = False
            report["witnesses"].append({"degree": d, "check": "form"})
        rk = rank([{j: v for j, v in enumerate(r) if v} for r in gram_moved])
        if rk != p.dim:
            report["dims"] = False
            report["witnesses"].append({"degree": d, "check": "dims", "before": p.dim, "after": rk})
        # sigma maps radical to radical
        for vec in p.radical:
            img = State()
            for i, c in vec.items():
                img = img + moved[d][i].scale(c)
            if any(form(T, chi, u, img) for u in p.words):
                report["radical"] = False
                report["witnesses"].append({"degree": d, "check": "radical"})
    # structure constants in quotient coordinates: <u, a(n) W> against <sigma u, sigma(a)(n) sigma W>
    for d, p in pieces.items():
        for i, w in enumerate(p.words):
            for a in range(T.gens.size):
                for n in range(-1, d + 2):
                    d2 = d + 1 - n
                    if d2 > d_max or d2 < 0:
                        continue
                    tgt = pieces[d2]
                    try:
                        x = apply_word(T, ((a, n),) + w, T.unit())
                        y = _moved_action(T, sigma, a, n, moved[d][i])
                        before = [form(T, chi, u, x) for u in tgt.words]
                        after = [_pair_states(T, chi, sigma, u, y) for u in tgt.words]
                    except CutoffError:
                        continue
                    if before != after:
                        report["structure"] = False
                        report["witnesses"].append({"degree": d, "word": i, "generator": a, "mode": n})
    report["ok"] = all(report[k] for k in ("form", "structure", "dims", "radical"))
    return report


def _moved_action(T: VertexTruncation, sigma, a: int, n: int, x: State) -> State:
    out = State()
    for c, w in transport_word(T, sigma, ((a, n),)):
        out = out + apply_word(T, w, x).scale(c)
    return out


def _pair_states(T: VertexTruncation, chi: Character, sigma, u: Word, x: State) -> Fraction:
    return sum((c * form(T, chi, wu, x) for c, wu in transport_word(T, sigma, u)), Fraction(0))
