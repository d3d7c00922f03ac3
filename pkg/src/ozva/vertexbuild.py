"""Truncated vertex algebra built as graded duals of the coalgebra layers.

The piece ``V^lambda_d`` is the dual of ``Omega^lambda_d``; its basis is dual
to the basis functions of the layer, so a state is simply the vector of
values it takes on those functions.  For the creation product
``Y(a_1, z_1) ... Y(a_l, z_l) 1 = sum_u alpha_u(z) u`` the function
attached to a basis state ``u`` is the basis function ``alpha_u``.

Two lengths matter: the tower length bounds the weights that can appear and
also the companions used to build each layer.  Dropping the companions that
do not fit only quotients the algebra by the states they would detect, and
that quotient is again a vertex algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import factorial
from typing import Mapping, Sequence

from .coalgebra import CoalgebraTower, TowerError, coalgebra_layer
from .exactlinalg import rank_factorization
from .funspaces import FunSpace
from .ratfun import RatFun, cross_pairs, split_terms

Weight = tuple[int, ...]
PieceKey = tuple[Weight, int]


class CutoffError(RuntimeError):
    """A requested state lies outside the weight-length or degree cutoff."""


@dataclass
class StateVector:
    weight: Weight
    degree: int
    coords: dict[int, Fraction]

    def __post_init__(self):
        self.weight = tuple(sorted(self.weight))
        self.coords = {k: Fraction(v) for k, v in self.coords.items() if v}


class State:
    """A finite sum of homogeneous pieces ``{(weight, degree): {basis index: coefficient}}``."""

    __slots__ = ("parts",)

    def __init__(self, parts: Mapping[PieceKey, Mapping[int, object]] | None = None):
        self.parts: dict[PieceKey, dict[int, Fraction]] = {}
        for key, vec in (parts or {}).items():
            v = {k: Fraction(c) for k, c in vec.items() if c}
            if v:
                self.parts[(tuple(sorted(key[0])), key[1])] = v

    @classmethod
    def of(cls, sv: StateVector) -> "State":
        return cls({(sv.weight, sv.degree): sv.coords})

    def is_zero(self) -> bool:
        return not self.parts

    def __add__(self, other: "State") -> "State":
        out = {k: dict(v) for k, v in self.parts.items()}
        for key, vec in other.parts.items():
            tgt = out.setdefault(key, {})
            for k, c in vec.items():
                tgt[k] = tgt.get(k, 0) + c
        return State(out)

    def __sub__(self, other: "State") -> "State":
        return self + other.scale(-1)

    def __neg__(self) -> "State":
        return self.scale(-1)

    def scale(self, c) -> "State":
        c = Fraction(c)
        if not c:
            return State()
        return State({k: {i: c * x for i, x in v.items()} for k, v in self.parts.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, State) and (self - other).is_zero()

    def __hash__(self):
        return hash(tuple(sorted((k, tuple(sorted(v.items()))) for k, v in self.parts.items())))

    def degrees(self) -> set[int]:
        return {d for _, d in self.parts}

    def pieces(self) -> list[StateVector]:
        return [StateVector(w, d, v) for (w, d), v in sorted(self.parts.items())]

    def to_json(self) -> list:
        return [[list(w), d, {str(k): _fmt(c) for k, c in sorted(v.items())}] for (w, d), v in sorted(self.parts.items())]

    def __repr__(self) -> str:
        return "State(%r)" % ({k: {i: str(c) for i, c in v.items()} for k, v in sorted(self.parts.items())},)


def _fmt(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else "%d/%d" % (c.numerator, c.denominator)


def _coef_1var(f: RatFun, e: int) -> Fraction:
    """Coefficient of z^e in a one-variable Laurent polynomial."""
    if f.is_zero():
        return Fraction(0)
    if f.diag:
        raise ValueError("one-variable function with diagonal factors")
    return f.term_map().get((e,), Fraction(0))


def merge_slots(lam: Weight, mu: Weight) -> tuple[Weight, list[int], list[int]]:
    """Canonical weight of lam + mu with the slots taken by lam (first among equals) and by mu."""
    nu = tuple(sorted(lam + mu))
    need = {}
    for g in lam:
        need[g] = need.get(g, 0) + 1
    I, J = [], []
    for p, g in enumerate(nu):
        if need.get(g, 0):
            I.append(p)
            need[g] -= 1
        else:
            J.append(p)
    return nu, I, J


class VertexTruncation:
    """Graded pieces, dual bases and structure constants up to cutoffs.

    ``max_length`` bounds weight lengths (it cannot exceed the tower length);
    ``max_degree`` bounds the degrees of materialized pieces.
    """

    def __init__(self, tower: CoalgebraTower, max_length: int | None = None, max_degree: int = 6):
        self.tower = tower
        self.L = tower.length if max_length is None else max_length
        if self.L > tower.length:
            raise CutoffError("truncation length %d exceeds the tower length %d" % (self.L, tower.length))
        self.D = max_degree
        self.gens = tower.gens
        self._pieces: dict[PieceKey, FunSpace] = {}
        self._gen: dict = {}
        self._prod: dict = {}
        self._sl2: dict = {}
        self._pairings: dict = {}

    # pieces -------------------------------------------------------------------
    def check_piece(self, lam: Sequence[int], d: int) -> None:
        if len(lam) > self.L:
            raise CutoffError("weight length %d exceeds the cutoff %d" % (len(lam), self.L))
        if d > self.D:
            raise CutoffError("degree %d exceeds the cutoff %d" % (d, self.D))

    def piece(self, lam: Sequence[int], d: int) -> FunSpace:
        lam = tuple(sorted(lam))
        self.check_piece(lam, d)
        key = (lam, d)
        sp = self._pieces.get(key)
        if sp is None:
            if d < 0:
                sp = FunSpace(len(lam), "layer", [], -4)
            else:
                sp = coalgebra_layer(self.tower, lam, d, self.L)
            self._pieces[key] = sp
        return sp

    def dim(self, lam: Sequence[int], d: int) -> int:
        return self.piece(lam, d).dim

    def weights(self, max_len: int | None = None) -> list[Weight]:
        top = self.L if max_len is None else min(max_len, self.L)
        return [w for l in range(top + 1) for w in self.tower.weights(l)]

    def dual_function(self, lam: Sequence[int], d: int, u: int) -> RatFun:
        return self.piece(lam, d).basis[u]

    def coords_in(self, lam: Weight, d: int, f: RatFun) -> dict[int, Fraction]:
        c = self.piece(lam, d).coords(f)
        if c is None:
            raise TowerError("function %r is not in the layer %r, degree %d" % (f, lam, d))
        return c

    # distinguished states ---------------------------------------------------------
    def unit(self) -> State:
        return State({((), 0): {0: 1}})

    def basis_state(self, lam: Sequence[int], d: int, u: int) -> State:
        lam = tuple(sorted(lam))
        if not 0 <= u < self.dim(lam, d):
            raise IndexError("basis index %d out of range for %r, degree %d" % (u, lam, d))
        return State({(lam, d): {u: 1}})

    def generator_state(self, g: int) -> State:
        """The generator g of G as a degree-2 state, i.e. ``g(-1) 1``."""
        return self.generator_action(g, -1, self.unit())

    def algebra_state(self, vec: Sequence) -> State:
        """An element of A, given in input coordinates, as a degree-2 state."""
        out = State()
        for g, c in self.gens.coords(vec).items():
            out = out + self.generator_state(g).scale(c)
        return out

    def omega_state(self) -> State:
        if self.gens.omega is None:
            raise ValueError("input algebra has no unit")
        return self.generator_state(self.gens.omega)

    # generator action --------------------------------------------------------------
    def _gen_matrix(self, a: int, n: int, mu: Weight, e: int) -> tuple[PieceKey, list[dict[int, Fraction]]]:
        """Rows indexed by source basis u, mapping to target coordinates v."""
        key = (a, n, mu, e)
        hit = self._gen.get(key)
        if hit is not None:
            return hit
        nu = tuple(sorted(mu + (a,)))
        e2 = e + 1 - n
        self.check_piece(nu, e2)
        target = self.piece(nu, e2)
        src = self.piece(mu, e)
        rows: list[dict[int, Fraction]] = [dict() for _ in range(src.dim)]
        p = nu.index(a)
        J = [q for q in range(len(nu)) if q != p]
        for v, alpha in enumerate(target.basis):
            if not mu:
                c = _coef_1var(alpha, -n - 1)
                if c and src.dim:
                    rows[0][v] = rows[0].get(v, 0) + c * self._unit_coord()
                continue
            for fz, gw in alpha.split_component([p], J, e):
                c = _coef_1var(fz, -n - 1)
                if not c:
                    continue
                for u, x in self.coords_in(mu, e, gw).items():
                    rows[u][v] = rows[u].get(v, 0) + c * x
        out = ((nu, e2), [{v: x for v, x in r.items() if x} for r in rows])
        self._gen[key] = out
        return out

    def _unit_coord(self) -> Fraction:
        return self.coords_in((), 0, RatFun.const(0, 1)).get(0, Fraction(0))

    def generator_action(self, a: int, n: int, x: State) -> State:
        """``a(n) x`` for a generator index a of G."""
        out: dict[PieceKey, dict[int, Fraction]] = {}
        for (mu, e), vec in x.parts.items():
            if e + 1 - n < 0:
                continue
            tkey, rows = self._gen_matrix(a, n, mu, e)
            tgt = out.setdefault(tkey, {})
            for u, c in vec.items():
                for v, y in rows[u].items():
                    tgt[v] = tgt.get(v, 0) + c * y
        return State(out)

    def vector_action(self, vec: Sequence, n: int, x: State) -> State:
        """``a(n) x`` for an element of A in input coordinates."""
        out = State()
        for g, c in self.gens.coords(vec).items():
            out = out + self.generator_action(g, n, x).scale(c)
        return out

    # products of arbitrary states ----------------------------------------------------
    def _product_block(self, lam: Weight, du: int, n: int, mu: Weight, dw: int):
        key = (lam, du, n, mu, dw)
        hit = self._prod.get(key)
        if hit is not None:
            return hit
        nu, I, J = merge_slots(lam, mu)
        dv = du + dw - n - 1
        self.check_piece(nu, dv)
        target = self.piece(nu, dv)
        table: dict[tuple[int, int], dict[int, Fraction]] = {}
        l_u = len(lam)
        Iset = set(I)
        for v, alpha in enumerate(target.basis):
            g = alpha.shifted_coefficient(I, -n - 1)
            if g.is_zero():
                continue
            terms, diag = g.expanded_terms(cross_pairs(len(nu), I, J))
            want = du - 2 * l_u - sum(k for (a, b), k in diag.items() if a in Iset and b in Iset)
            terms = {e: c for e, c in terms.items() if sum(e[q] for q in I) == want}
            if not terms:
                continue
            if not J:
                pairs = [(RatFun.from_terms(len(nu), terms, diag), RatFun.const(0, 1))]
            else:
                pairs = split_terms(len(nu), terms, diag, I, J, rank_factorization)
            for fu, gw in pairs:
                cu = self.coords_in(lam, du, fu)
                cw = self.coords_in(mu, dw, gw)
                for u, x in cu.items():
                    for w, y in cw.items():
                        slot = table.setdefault((u, w), {})
                        slot[v] = slot.get(v, 0) + x * y
        out = ((nu, dv), {k: {v: c for v, c in t.items() if c} for k, t in table.items()})
        self._prod[key] = out
        return out

    def state_product(self, u: State, n: int, w: State) -> State:
        """``u(n) w`` read from the expansion of the dual functions of the target piece."""
        out: dict[PieceKey, dict[int, Fraction]] = {}
        for (lam, du), xu in u.parts.items():
            for (mu, dw), xw in w.parts.items():
                if du + dw - n - 1 < 0:
                    continue
                tkey, table = self._product_block(lam, du, n, mu, dw)
                tgt = out.setdefault(tkey, {})
                for (i, j), col in table.items():
                    c = xu.get(i, 0) * xw.get(j, 0)
                    if not c:
                        continue
                    for v, y in col.items():
                        tgt[v] = tgt.get(v, 0) + c * y
        return State(out)

    # sl2 -------------------------------------------------------------------------------
    def _sl2_matrix(self, op: str, lam: Weight, d: int):
        key = (op, lam, d)
        hit = self._sl2.get(key)
        if hit is not None:
            return hit
        l = len(lam)
        d2 = d + 1 if op == "D" else d - 1
        rows: list[dict[int, Fraction]] = [dict() for _ in range(self.dim(lam, d))]
        if d2 >= 0:
            self.check_piece(lam, d2)
            target = self.piece(lam, d2)
            for v, alpha in enumerate(target.basis):
                if op == "D":
                    img = alpha.apply_delta() if l else RatFun.zero(0)
                else:
                    img = alpha.apply_delta_star([4] * l) if l else RatFun.zero(0)
                for u, x in self.coords_in(lam, d, img).items():
                    rows[u][v] = x
        out = ((lam, d2), rows)
        self._sl2[key] = out
        return out

    def sl2_action(self, op: str, x: State) -> State:
        """Apply ``D`` (dual of Delta), ``Dstar`` (dual of Delta*(4..4)) or ``delta`` (grading)."""
        if op == "delta":
            return State({k: {u: c * k[1] for u, c in v.items()} for k, v in x.parts.items()})
        if op not in ("D", "Dstar"):
            raise ValueError("unknown operator %r" % op)
        out: dict[PieceKey, dict[int, Fraction]] = {}
        for (lam, d), vec in x.parts.items():
            if op == "Dstar" and d == 0:
                continue
            tkey, rows = self._sl2_matrix(op, lam, d)
            tgt = out.setdefault(tkey, {})
            for u, c in vec.items():
                for v, y in rows[u].items():
                    tgt[v] = tgt.get(v, 0) + c * y
        return State(out)

    def translate(self, x: State, k: int) -> State:
        """``D^k x / k!``."""
        for _ in range(k):
            x = self.sl2_action("D", x)
        return x.scale(Fraction(1, factorial(k)))

    # pairing with correlation functions -------------------------------------------------
    def pair_with(self, x: StateVector, f: RatFun) -> Fraction:
        c = self.coords_in(x.weight, x.degree, f)
        return sum((x.coords.get(u, 0) * y for u, y in c.items()), Fraction(0))

    def glue_functions(self, x: State, top: int | None = None):
        """Yield ``((d, mu, family), R)`` for the correlation functions x produces against companions.

        A state is zero in the glued algebra when every correlation function
        ``phi(f, mu (x) lambda)``, split in degree d between the mu slots and the
        lambda slots, pairs with it to zero.  Companions mu run over all weights
        that fit into the cutoff together with every piece of x, or up to
        length ``top`` when given; comparisons between states must use one
        range for both sides, since a side truncated to zero would otherwise
        widen it.
        """
        tower = self.tower
        unit_fn = RatFun.const(0, 1)
        for d in sorted(x.degrees()):
            parts = {w: v for (w, dd), v in x.parts.items() if dd == d}
            reach = self.L - max(len(w) for w in parts)
            if top is not None:
                reach = min(reach, top)
            for m in range(reach + 1):
                for mu in tower.weights(m):
                    for fam in range(len(tower.families)):
                        acc = RatFun.zero(m)
                        for lam, vec in sorted(parts.items()):
                            sv = StateVector(lam, d, vec)
                            f = tower.value(fam, mu + lam)
                            if f.is_zero():
                                continue
                            if m == 0:
                                if d == 0:
                                    acc = acc + RatFun.const(0, self.pair_with(sv, f))
                                continue
                            if not lam:
                                if d == 0:
                                    acc = acc + f.scale(self.pair_with(sv, unit_fn))
                                continue
                            I, J = list(range(m)), list(range(m, m + len(lam)))
                            for fi, gj in f.split_component(I, J, d):
                                c = self.pair_with(sv, gj)
                                if c:
                                    acc = acc + fi.scale(c)
                        yield (d, mu, fam), acc

    def glue_defects(self, x: State, max_witnesses: int = 3, top: int | None = None) -> list[tuple]:
        """Witnesses ``(d, mu, family, R)`` that x is nonzero in the glued algebra."""
        out = []
        for (d, mu, fam), acc in self.glue_functions(x, top):
            if not acc.is_zero():
                out.append((d, mu, fam, acc))
                if len(out) >= max_witnesses:
                    break
        return out

    def glue_vector(self, x: State, top: int | None = None) -> dict:
        """A sparse vector that vanishes exactly when x is glued to zero; linear in x."""
        out = {}
        for key, acc in self.glue_functions(x, top):
            if acc.is_zero():
                continue
            pairs = list(combinations(range(acc.nvars), 2))
            for e, c in acc.numerator_coords(pairs, -4).items():
                out[key + (e,)] = c
        return out

    def glued_equal(self, x: State, y: State, length: int | None = None) -> bool:
        """Equality in the glued algebra, probing with companions that fit next to weights of ``length``."""
        top = None if length is None else self.L - length
        return not self.glue_defects(x - y, 1, top)

    # bookkeeping ----------------------------------------------------------------------------
    def dimension_table(self, max_len: int | None = None) -> dict[str, dict[str, int]]:
        out = {}
        for lam in self.weights(max_len):
            row = {}
            for d in range(self.D + 1):
                try:
                    row[str(d)] = self.dim(lam, d)
                except CutoffError:
                    break
            out[self.tower.weight_label(lam)] = row
        return out

    def export_block(self, lam: Weight, du: int, n: int, mu: Weight, dw: int) -> list[tuple]:
        """Structure constants of one product block as (u, n, w, v, coefficient) tuples."""
        _, table = self._product_block(tuple(sorted(lam)), du, n, tuple(sorted(mu)), dw)
        return [(u, n, w, v, _fmt(c)) for (u, w), col in sorted(table.items()) for v, c in sorted(col.items())]


def build_truncation(tower: CoalgebraTower, L: int | None = None, D: int = 6) -> VertexTruncation:
    return VertexTruncation(tower, L, D)


def word_state(T: VertexTruncation, word: Sequence[tuple[int, int]]) -> State:
    """``a_1(n_1) ... a_k(n_k) 1`` for a word of (generator, mode) pairs, applied right to left."""
    x = T.unit()
    for a, n in reversed(list(word)):
        x = T.generator_action(a, n, x)
        if x.is_zero():
            break
    return x
