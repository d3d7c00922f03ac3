"""Inductive construction of the correlation-function coalgebra.

A functional on the degree-0 algebra is stored as a *family*: one function
per weight, each in the canonical slot order of its weight.  The families
form a basis of the dual of ``B_0`` up to the current length.  Length ``l``
is built from length ``l - 1`` by

* weights containing omega: the Virasoro recursion (translation operator
  ``TE`` plus the fourth-order pole terms),
* other weights: the canonical admissible lift of the pole data
  ``phi(f, r_ij(lambda))``, symmetrized over the weight's stabilizer,
  plus one new family per basis element of the kernel of the pole-data map.

Input basis indices in algebra documents are 0-based.
"""

from __future__ import annotations

import json
import os
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from typing import Iterable, Mapping, Sequence

from .exactlinalg import Coordinates, independent_subset, rank, rref_kernel
from .funspaces import (
    FunSpace,
    PoleMap,
    average,
    group_closure,
    independent_functions,
    pole_data,
    space_basis,
    symmetrize,
    two_block_partitions,
    weight_group,
)
from .ratfun import RatFun, lincomb, pi_product

Weight = tuple[int, ...]
Tensor = dict[tuple[int, ...], Fraction]


class AlgebraError(ValueError):
    """Invalid algebra input; ``where`` names the offending indices."""

    def __init__(self, message: str, where: tuple = ()):
        super().__init__(message)
        self.where = where


class TowerError(RuntimeError):
    """Internal consistency failure while building the tower."""


def parse_rational(x) -> Fraction:
    if isinstance(x, bool):
        raise AlgebraError("boolean is not a rational: %r" % (x,))
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise AlgebraError("bad rational %r" % x) from exc
    raise AlgebraError("rationals must be integers or 'p/q' strings, got %r" % (x,))


def format_rational(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else "%d/%d" % (x.numerator, x.denominator)


# -- input algebra -------------------------------------------------------------

@dataclass
class GriessAlgebraInput:
    """Commutative algebra with a symmetric invariant form, in a fixed basis.

    ``product[i][j][k]`` is the coefficient of ``a_k`` in ``a_i a_j``.
    Automorphism matrices act on coordinate columns: column ``j`` holds the
    image of ``a_j``.
    """

    labels: list[str]
    product: list[list[list[Fraction]]]
    form: list[list[Fraction]]
    unit: list[Fraction] | None = None
    automorphisms: list[list[list[Fraction]]] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.labels)

    def mul(self, u: Sequence, v: Sequence) -> list[Fraction]:
        n = self.dim
        out = [Fraction(0)] * n
        for i in range(n):
            if not u[i]:
                continue
            for j in range(n):
                if not v[j]:
                    continue
                c = u[i] * v[j]
                row = self.product[i][j]
                for k in range(n):
                    if row[k]:
                        out[k] += c * row[k]
        return out

    def pair(self, u: Sequence, v: Sequence) -> Fraction:
        n = self.dim
        return sum((u[i] * self.form[i][j] * v[j] for i in range(n) for j in range(n) if u[i] and v[j]),
                   Fraction(0))

    def basis_vector(self, i: int) -> list[Fraction]:
        return [Fraction(int(k == i)) for k in range(self.dim)]

    @property
    def omega(self) -> list[Fraction] | None:
        return None if self.unit is None else [2 * x for x in self.unit]

    @property
    def nondegenerate(self) -> bool:
        rows = [{j: v for j, v in enumerate(r) if v} for r in self.form]
        return rank(rows) == self.dim

    def central_charge(self) -> Fraction | None:
        w = self.omega
        return None if w is None else 2 * self.pair(w, w)

    def to_document(self) -> dict:
        n = self.dim
        prod = []
        for i in range(n):
            for j in range(i, n):
                if any(self.product[i][j]):
                    prod.append([i, j, [format_rational(c) for c in self.product[i][j]]])
        form = [[i, j, format_rational(self.form[i][j])] for i in range(n) for j in range(i, n) if self.form[i][j]]
        doc = {"dim": n, "basis": list(self.labels), "product": prod, "form": form}
        if self.unit is not None:
            doc["unit"] = [format_rational(c) for c in self.unit]
        if self.automorphisms:
            doc["automorphisms"] = [[[format_rational(c) for c in row] for row in m] for m in self.automorphisms]
        return doc


def load_algebra(document) -> GriessAlgebraInput:
    """Parse and validate an algebra document (a dict, a JSON string or a path)."""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        if isinstance(document, os.PathLike) or (isinstance(document, str) and not document.lstrip().startswith("{")):
            with open(document, "r", encoding="utf-8") as fh:
                document = json.load(fh)
        elif isinstance(document, str):
            document = json.loads(document)
    except json.JSONDecodeError as exc:
        raise AlgebraError("malformed JSON: %s" % exc) from exc
    if not isinstance(document, Mapping):
        raise AlgebraError("algebra document must be a mapping")
    try:
        n = int(document["dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise AlgebraError("missing or invalid 'dim'") from exc
    if n < 1:
        raise AlgebraError("dim must be positive")
    labels = [str(x) for x in document.get("basis", ["a%d" % i for i in range(n)])]
    if len(labels) != n or len(set(labels)) != n:
        raise AlgebraError("'basis' must list %d distinct labels" % n)

    def index(x, what):
        if isinstance(x, bool) or not isinstance(x, int) or not 0 <= x < n:
            raise AlgebraError("%s index %r out of range 0..%d" % (what, x, n - 1))
        return x

    product = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
    seen: dict[tuple[int, int], list[Fraction]] = {}
    for entry in document.get("product", []):
        if not isinstance(entry, Sequence) or len(entry) != 3:
            raise AlgebraError("product entries are [i, j, [coords]]: %r" % (entry,))
        i, j = index(entry[0], "product"), index(entry[1], "product")
        coords = entry[2]
        if not isinstance(coords, Sequence) or isinstance(coords, str) or len(coords) != n:
            raise AlgebraError("product a_%d a_%d needs %d coordinates" % (i, j, n), (i, j))
        vals = [parse_rational(c) for c in coords]
        other = seen.get((j, i))
        if other is not None and other != vals:
            k = next(q for q in range(n) if other[q] != vals[q])
            raise AlgebraError("commutativity fails: c_{%d%d}^%d = %s but c_{%d%d}^%d = %s"
                               % (i, j, k, vals[k], j, i, k, other[k]), (i, j, k))
        if (i, j) in seen and seen[(i, j)] != vals:
            raise AlgebraError("product a_%d a_%d given twice with different values" % (i, j), (i, j))
        seen[(i, j)] = vals
        product[i][j] = list(vals)
        product[j][i] = list(vals)

    form = [[Fraction(0)] * n for _ in range(n)]
    fseen: dict[tuple[int, int], Fraction] = {}
    for entry in document.get("form", []):
        if not isinstance(entry, Sequence) or len(entry) != 3:
            raise AlgebraError("form entries are [i, j, value]: %r" % (entry,))
        i, j = index(entry[0], "form"), index(entry[1], "form")
        v = parse_rational(entry[2])
        if (j, i) in fseen and fseen[(j, i)] != v:
            raise AlgebraError("form is not symmetric at (%d,%d): %s vs %s" % (i, j, v, fseen[(j, i)]), (i, j))
        if (i, j) in fseen and fseen[(i, j)] != v:
            raise AlgebraError("form entry (%d,%d) given twice with different values" % (i, j), (i, j))
        fseen[(i, j)] = v
        form[i][j] = form[j][i] = v

    unit = None
    if document.get("unit") is not None:
        unit = [parse_rational(c) for c in document["unit"]]
        if len(unit) != n:
            raise AlgebraError("unit needs %d coordinates" % n)
    autos = []
    for m, mat in enumerate(document.get("automorphisms", []) or []):
        if len(mat) != n or any(len(r) != n for r in mat):
            raise AlgebraError("automorphism %d must be a %dx%d matrix" % (m, n, n), (m,))
        autos.append([[parse_rational(c) for c in r] for r in mat])
    alg = GriessAlgebraInput(labels, product, form, unit, autos)
    validate_algebra(alg)
    return alg


def validate_algebra(alg: GriessAlgebraInput) -> None:
    n = alg.dim
    e = [alg.basis_vector(i) for i in range(n)]
    for i in range(n):
        for j in range(n):
            if alg.product[i][j] != alg.product[j][i]:
                k = next(q for q in range(n) if alg.product[i][j][q] != alg.product[j][i][q])
                raise AlgebraError("commutativity fails at (%d,%d,%d)" % (i, j, k), (i, j, k))
            if alg.form[i][j] != alg.form[j][i]:
                raise AlgebraError("form is not symmetric at (%d,%d)" % (i, j), (i, j))
    for i in range(n):
        for j in range(n):
            ab = alg.product[i][j]
            for k in range(n):
                lhs = alg.pair(ab, e[k])
                rhs = alg.pair(e[i], alg.product[j][k])
                if lhs != rhs:
                    raise AlgebraError("invariance fails for (%d,%d,%d): <a%d a%d, a%d> = %s, <a%d, a%d a%d> = %s"
                                       % (i, j, k, i, j, k, lhs, i, j, k, rhs), (i, j, k))
    if alg.unit is not None:
        for i in range(n):
            if alg.mul(alg.unit, e[i]) != e[i]:
                raise AlgebraError("unit axiom fails: e * a_%d != a_%d" % (i, i), (i,))
    for m, mat in enumerate(alg.automorphisms):
        img = [[mat[k][j] for k in range(n)] for j in range(n)]
        for i in range(n):
            for j in range(n):
                lhs = alg.mul(img[i], img[j])
                rhs = [sum((mat[k][q] * alg.product[i][j][q] for q in range(n)), Fraction(0)) for k in range(n)]
                if lhs != rhs:
                    raise AlgebraError("automorphism %d does not preserve the product at (%d,%d)" % (m, i, j), (m, i, j))
                if alg.pair(img[i], img[j]) != alg.form[i][j]:
                    raise AlgebraError("automorphism %d does not preserve the form at (%d,%d)" % (m, i, j), (m, i, j))


# -- generator basis -------------------------------------------------------------

class Generators:
    """The working basis G of A.

    With a unit, G is a basis of the orthogonal complement of omega followed
    by omega itself (or any complement when <omega, omega> = 0), so omega is
    always the last generator and sorts last in a weight.
    """

    def __init__(self, alg: GriessAlgebraInput):
        self.alg = alg
        n = alg.dim
        std = [alg.basis_vector(i) for i in range(n)]
        if alg.unit is None:
            vecs = std
            self.omega = None
        else:
            w = alg.omega
            ww = alg.pair(w, w)
            if ww:
                row = {j: alg.pair(w, std[j]) for j in range(n)}
                _, ker = rref_kernel([{j: v for j, v in row.items() if v}], n)
                comp = [[b.get(j, Fraction(0)) for j in range(n)] for b in ker.basis]
            else:
                cand = [w] + std
                keep = independent_subset([{j: v for j, v in enumerate(c) if v} for c in cand])
                comp = [cand[k] for k in keep if k != 0]
            vecs = comp + [w]
            self.omega = len(vecs) - 1
        self.vectors = vecs
        self.labels = [self._label(v, k) for k, v in enumerate(vecs)]
        self.size = len(vecs)
        self._coords = Coordinates([{j: v for j, v in enumerate(c) if v} for c in vecs])
        self.mult = [[self.coords(alg.mul(a, b)) for b in vecs] for a in vecs]
        self.form = [[alg.pair(a, b) for b in vecs] for a in vecs]

    def _label(self, v, k) -> str:
        if self.omega is not None and k == len(self.vectors) - 1 and v == self.alg.omega:
            return "omega"
        nz = [j for j, x in enumerate(v) if x]
        if len(nz) == 1 and v[nz[0]] == 1:
            return self.alg.labels[nz[0]]
        return "g%d" % k

    def coords(self, vec: Sequence) -> dict[int, Fraction]:
        """Coordinates over G of a vector given in the input basis."""
        c = self._coords.coords({j: Fraction(v) for j, v in enumerate(vec) if v})
        if c is None:
            raise ValueError("vector is not in A")
        return {k: v for k, v in sorted(c.items()) if v}

    def vector(self, coords: Mapping[int, object]) -> list[Fraction]:
        out = [Fraction(0)] * self.alg.dim
        for k, c in coords.items():
            for j, x in enumerate(self.vectors[k]):
                out[j] += Fraction(c) * x
        return out

    def is_omega_free(self, weight: Weight) -> bool:
        return self.omega is None or self.omega not in weight


def tensor_from_vectors(gens: Generators, vectors: Sequence[Sequence]) -> Tensor:
    """Expand ``v_1 (x) ... (x) v_l`` (input coordinates) over words in G."""
    out: Tensor = {(): Fraction(1)}
    for v in vectors:
        c = gens.coords(v)
        out = {w + (k,): a * b for w, a in out.items() for k, b in c.items()}
    return {w: a for w, a in out.items() if a}


def r_map(tensor: Mapping[tuple, object], i: int, j: int, k: int, gens: Generators) -> Tensor:
    """``r^(1)_ij`` (product placed at slot j, slot i removed) or ``r^(3)_ij`` (pairing, both removed).

    Slots are 0-based with ``i < j``.
    """
    if not i < j:
        raise ValueError("r_map needs i < j")
    if k not in (1, 3):
        raise ValueError("k must be 1 or 3")
    out: Tensor = {}
    for word, c in tensor.items():
        if j >= len(word):
            raise ValueError("slot %d outside a tensor of length %d" % (j, len(word)))
        a, b = word[i], word[j]
        if k == 3:
            s = gens.form[a][b]
            if s:
                w = word[:i] + word[i + 1:j] + word[j + 1:]
                out[w] = out.get(w, 0) + Fraction(c) * s
            continue
        for g, s in gens.mult[a][b].items():
            w = word[:i] + word[i + 1:j] + (g,) + word[j + 1:]
            out[w] = out.get(w, 0) + Fraction(c) * s
    return {w: c for w, c in out.items() if c}


def weights_of_length(nsym: int, l: int) -> list[Weight]:
    return list(combinations_with_replacement(range(nsym), l))


def canonical_order(word: Sequence[int]) -> list[int]:
    """Stable sort permutation: position p of the sorted word is word position order[p]."""
    return sorted(range(len(word)), key=lambda q: word[q])


def _inverse(p: Sequence[int]) -> list[int]:
    inv = [0] * len(p)
    for a, b in enumerate(p):
        inv[b] = a
    return inv


# -- the tower ---------------------------------------------------------------------

@dataclass
class Family:
    born_length: int
    born_weight: Weight | None


class CoalgebraTower:
    """Families of correlation functions up to a maximal length."""

    def __init__(self, alg: GriessAlgebraInput, check_length: int = 5):
        self.algebra = alg
        self.gens = Generators(alg)
        self.length = 0
        self.check_length = check_length
        self.families: list[Family] = [Family(0, None)]
        self.values: dict[Weight, dict[int, RatFun]] = {(): {0: RatFun.const(0, 1)}}
        self.kernel_dims: dict[Weight, int] = {}
        self.gluing_ranks: dict[Weight, int] = {}
        self._word_cache: dict = {}
        self._pole_maps: dict = {}

    # values ---------------------------------------------------------------
    def weights(self, l: int) -> list[Weight]:
        return weights_of_length(self.gens.size, l)

    def value(self, fam: int, word: Sequence[int]) -> RatFun:
        """``phi(f_fam, g_1 (x) ... (x) g_l)`` for a word over G, in word slot order."""
        word = tuple(word)
        key = (fam, word)
        hit = self._word_cache.get(key)
        if hit is not None:
            return hit
        l = len(word)
        if l > self.length:
            raise TowerError("tower has length %d, asked for a word of length %d" % (self.length, l))
        order = canonical_order(word)
        lam = tuple(word[q] for q in order)
        base = self.values.get(lam, {}).get(fam)
        if base is None:
            out = RatFun.zero(l)
        elif order == list(range(l)):
            out = base
        else:
            # canonical slot p sits at word position order[p]
            out = base.permute(order)
        if len(self._word_cache) > 20000:
            self._word_cache.clear()
        self._word_cache[key] = out
        return out

    def phi(self, fam: int, tensor: Mapping[tuple, object]) -> RatFun:
        """Multilinear extension of ``value`` to a tensor over G."""
        if not tensor:
            raise ValueError("empty tensor; pass an explicit length with phi_zero")
        l = len(next(iter(tensor)))
        return lincomb([(c, self.value(fam, w)) for w, c in sorted(tensor.items()) if c], l)

    def phi_input(self, fam: int, vectors: Sequence[Sequence]) -> RatFun:
        """phi on a tensor of input-basis vectors."""
        t = tensor_from_vectors(self.gens, vectors)
        if not t:
            return RatFun.zero(len(vectors))
        return self.phi(fam, t)

    def omega0(self, lam: Weight) -> FunSpace:
        """Basis of the span of all family values at the weight."""
        l = len(lam)
        funcs = [f for _, f in sorted(self.values.get(tuple(lam), {}).items())]
        funcs = [f for f in funcs if not f.is_zero()]
        if not funcs:
            return FunSpace(l, "omega0", [], -4)
        keep = independent_functions(funcs, -4)
        return FunSpace(l, "omega0", [funcs[k] for k in keep], -4)

    def dim_b0(self, l: int | None = None) -> int:
        l = self.length if l is None else l
        return sum(1 for f in self.families if f.born_length <= l)

    # building -----------------------------------------------------------------
    def extend(self, L: int) -> "CoalgebraTower":
        while self.length < L:
            self._build_length(self.length + 1)
        return self

    def _rho_targets(self, fam: int, lam: Weight) -> dict[tuple, RatFun]:
        l = len(lam)
        data = {}
        for i, j in combinations(range(l), 2):
            for k, m in ((1, -2), (3, -4)):
                t = r_map({lam: Fraction(1)}, i, j, k, self.gens)
                if not t:
                    continue
                f = self.phi(fam, t)
                if not f.is_zero():
                    data[(i, j, m)] = f
        return data

    def _pole_map(self, lam: Weight) -> PoleMap:
        pattern = tuple(lam[q] == lam[q + 1] for q in range(len(lam) - 1))
        pm = self._pole_maps.get(pattern)
        if pm is None:
            l = len(lam)
            space = symmetrize(space_basis(l, "admissible"), weight_group(lam))
            pm = PoleMap(space)
            self._pole_maps[pattern] = pm
        return pm

    def _insert_omega(self, fam: int, lam: Weight) -> RatFun:
        l = len(lam)
        prev = lam[:-1]
        beta = self.values.get(prev, {}).get(fam)
        terms = []
        if beta is not None and not beta.is_zero():
            terms.append((1, beta.te_operator()))
        w = self.gens.omega
        for i in range(l - 1):
            s = self.gens.form[lam[i]][w]
            if not s:
                continue
            rest = prev[:i] + prev[i + 1:]
            bi = self.values.get(rest, {}).get(fam)
            if bi is None or bi.is_zero():
                continue
            pos = [q for q in range(l) if q not in (i, l - 1)]
            terms.append((s, bi.embed(l, pos) * RatFun.diff(l, i, l - 1, -4)))
        return lincomb(terms, l)

    def _build_length(self, l: int) -> None:
        self._word_cache.clear()
        self.length = l
        nfam = len(self.families)
        new_families: list[tuple[Weight, RatFun]] = []
        for lam in self.weights(l):
            vals: dict[int, RatFun] = {}
            if not self.gens.is_omega_free(lam):
                for fam in range(nfam):
                    v = self._insert_omega(fam, lam)
                    if not v.is_zero():
                        vals[fam] = v
                self.values[lam] = vals
                continue
            if l == 1:
                self.values[lam] = {}
                continue
            pm = self._pole_map(lam)
            datas = [self._rho_targets(fam, lam) for fam in range(nfam)]
            live = [fam for fam in range(nfam) if datas[fam]]
            lifts = pm.solve_many([datas[fam] for fam in live])
            for fam, lift in zip(live, lifts):
                if lift is None:
                    raise TowerError("no admissible lift for family %d at weight %r" % (fam, lam))
                if not lift.is_zero():
                    vals[fam] = lift
            kernel = pm.kernel()
            self.kernel_dims[lam] = len(kernel)
            self.gluing_ranks[lam] = len(independent_subset_funcs(list(vals.values())))
            self.values[lam] = vals
            for g in kernel:
                new_families.append((lam, g))
        for lam, g in new_families:
            idx = len(self.families)
            self.families.append(Family(l, lam))
            self.values[lam][idx] = g
        self._word_cache.clear()
        if l <= self.check_length:
            self.check_length_consistency(l)

    # checks ---------------------------------------------------------------------
    def check_length_consistency(self, l: int) -> None:
        """Pole data and stabilizer symmetry of every value at length l."""
        for lam in self.weights(l):
            for fam, f in sorted(self.values.get(lam, {}).items()):
                for g in weight_group(lam):
                    if f.permute(g) != f:
                        raise TowerError("value of family %d at %r is not symmetric under %r" % (fam, lam, g))
                if l < 2:
                    continue
                got = pole_data(f)
                want = self._rho_targets(fam, lam)
                if set(got) != set(want) or any(got[k] != want[k] for k in got):
                    bad = sorted(set(got) ^ set(want) | {k for k in set(got) & set(want) if got[k] != want[k]})
                    raise TowerError("pole data of family %d at %r disagree at %r" % (fam, lam, bad[:3]))

    def dimension_report(self) -> dict:
        """Per-weight dimensions of Omega_0 and the growth of B_0."""
        out = {"omega0": {}, "b0": {}}
        for l in range(self.length + 1):
            for lam in self.weights(l):
                out["omega0"][self.weight_label(lam)] = self.omega0(lam).dim
            out["b0"][str(l)] = self.dim_b0(l)
        return out

    def weight_label(self, lam: Sequence[int]) -> str:
        if not lam:
            return "1"
        parts = []
        for g in sorted(set(lam)):
            m = lam.count(g)
            parts.append(self.gens.labels[g] + ("^%d" % m if m > 1 else ""))
        return "*".join(parts)

    # serialization --------------------------------------------------------------
    def to_json(self) -> dict:
        vals = {}
        for lam in sorted(self.values):
            vals[",".join(map(str, lam))] = {str(f): g.to_json() for f, g in sorted(self.values[lam].items())}
        return {
            "algebra": self.algebra.to_document(),
            "length": self.length,
            "generators": self.gens.labels,
            "families": [[f.born_length, list(f.born_weight) if f.born_weight is not None else None]
                         for f in self.families],
            "values": vals,
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "CoalgebraTower":
        alg = load_algebra(doc["algebra"])
        t = cls(alg)
        t.length = int(doc["length"])
        t.families = [Family(a, tuple(b) if b is not None else None) for a, b in doc["families"]]
        t.values = {}
        for key, fams in doc["values"].items():
            lam = tuple(int(x) for x in key.split(",")) if key else ()
            t.values[lam] = {int(f): RatFun.from_json(g) for f, g in fams.items()}
        return t


def independent_subset_funcs(funcs: Sequence[RatFun]) -> list[int]:
    funcs = [f for f in funcs if not f.is_zero()]
    if not funcs:
        return []
    return independent_functions(funcs, -4)


def build_tower(alg: GriessAlgebraInput, L: int, check_length: int = 5) -> CoalgebraTower:
    return CoalgebraTower(alg, check_length=check_length).extend(L)


def extend_tower(tower: CoalgebraTower, l: int) -> CoalgebraTower:
    if tower.length < l - 1:
        raise TowerError("tower has length %d; cannot build length %d" % (tower.length, l))
    return tower.extend(l)


def omega0_step(tower: CoalgebraTower, lam: Sequence[int]) -> FunSpace:
    """The space Omega_0 at a weight of length at most the tower length."""
    lam = tuple(sorted(lam))
    if len(lam) > tower.length:
        raise TowerError("tower incomplete: length %d < %d" % (tower.length, len(lam)))
    return tower.omega0(lam)


# -- coalgebra layers ---------------------------------------------------------------

def layer_functions(tower: CoalgebraTower, lam: Sequence[int], d: int, max_total: int | None = None) -> list[RatFun]:
    """J-factors of degree-d components of all family values with companions in front."""
    lam = tuple(sorted(lam))
    l = len(lam)
    top = tower.length if max_total is None else min(max_total, tower.length)
    if l > top:
        raise TowerError("weight of length %d exceeds the cutoff %d" % (l, top))
    out: list[RatFun] = []
    nfam = len(tower.families)
    for m in range(0, top - l + 1):
        for mu in tower.weights(m):
            word = mu + lam
            for fam in range(nfam):
                f = tower.value(fam, word)
                if f.is_zero():
                    continue
                if m == 0:
                    if d == 0:
                        out.append(f)
                    continue
                if l == 0:
                    continue
                I, J = list(range(m)), list(range(m, m + l))
                for _, g in f.split_component(I, J, d):
                    out.append(g)
    if l == 0 and d == 0:
        out.append(RatFun.const(0, 1))
    return out


def span_space(l: int, funcs: Sequence[RatFun], kind: str = "layer") -> FunSpace:
    funcs = [f for f in funcs if not f.is_zero()]
    if not funcs:
        return FunSpace(l, kind, [], -4)
    floor = min([-4] + [k for f in funcs for _, k in f.diag])
    keep = independent_functions(funcs, floor)
    return FunSpace(l, kind, [funcs[k] for k in keep], floor)


def coalgebra_layer(tower: CoalgebraTower, lam: Sequence[int], d: int, max_total: int | None = None) -> FunSpace:
    """Omega^lambda_d: span of the lambda-side factors of degree-d components."""
    if d < 0:
        raise ValueError("degree must be non-negative")
    lam = tuple(sorted(lam))
    return span_space(len(lam), layer_functions(tower, lam, d, max_total))


# -- polynomiality rank test ------------------------------------------------------------

def _comp0(f: RatFun, P) -> RatFun:
    I, J = P
    return f.component(list(J), list(I), 0)


def coproduct_rank_test(tower: CoalgebraTower, lam: Sequence[int]) -> tuple[int, int]:
    """``(rank of alpha -> (alpha)_0(P)_P, dim of coherent symmetric families)`` at a weight.

    Equality means the symmetrized-square multiplication map is injective
    in this weight.
    """
    lam = tuple(sorted(lam))
    l = len(lam)
    parts = two_block_partitions(l)
    space = tower.omega0(lam)
    # rank of the component map
    rows = []
    for f in space.basis:
        rows.append([_comp0(f, P) for P in parts])
    # unknowns: c_{P,s,t} multiplying u_s(z_I) w_t(z_J)
    unknowns = []
    for pi, (I, J) in enumerate(parts):
        U = tower.omega0(tuple(lam[q] for q in I)).basis
        W = tower.omega0(tuple(lam[q] for q in J)).basis
        for u in U:
            for w in W:
                unknowns.append((pi, u.embed(l, I) * w.embed(l, J)))
    index = {P: k for k, P in enumerate(parts)}
    keyed: list[dict] = [dict() for _ in unknowns]
    # coherence: (alpha(P))_0(Q) = (alpha(Q))_0(P)
    for p, q in combinations(range(len(parts)), 2):
        for k, (pi, g) in enumerate(unknowns):
            if pi == p:
                keyed[k][("coh", p, q)] = _comp0(g, parts[q])
            elif pi == q:
                keyed[k][("coh", p, q)] = -_comp0(g, parts[p])
    # stabilizer symmetry: alpha(sigma P) = sigma alpha(P)
    for sigma in weight_group(lam):
        for k, (pi, g) in enumerate(unknowns):
            I, J = parts[pi]
            img = (tuple(sorted(sigma[q] for q in I)), tuple(sorted(sigma[q] for q in J)))
            tgt = index.get(img, index.get((img[1], img[0])))
            for key, h in ((("sym", sigma, tgt), g.permute(sigma)), (("sym", sigma, pi), -g)):
                keyed[k][key] = keyed[k][key] + h if key in keyed[k] else h
    vecs = _stack(keyed, l)
    coherent = len(unknowns) - rank(vecs)
    comp_rank = rank(_stack([{("p", pi): f for pi, f in enumerate(r)} for r in rows], l)) if rows else 0
    return comp_rank, coherent


def _stack(keyed: Sequence[Mapping], l: int) -> list[dict]:
    """Coordinate vectors of dicts key -> function, over a shared index."""
    pairs = list(combinations(range(l), 2))
    index: dict = {}
    out = []
    for d in keyed:
        v = {}
        for key, f in d.items():
            if f.is_zero():
                continue
            for e, c in f.numerator_coords(pairs, -4).items():
                v[index.setdefault((key, e), len(index))] = c
        out.append(v)
    return out


# -- graph witnesses ----------------------------------------------------------------------

def _connected(nv: int, edges: Sequence[tuple[int, int]]) -> bool:
    adj = [[] for _ in range(nv)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = {0}
    queue = deque([0])
    while queue:
        a = queue.popleft()
        for b in adj[a]:
            if b not in seen:
                seen.add(b)
                queue.append(b)
    return len(seen) == nv


def graph_generator(edges: Iterable[Sequence[int]]) -> tuple[RatFun, list[int]]:
    """Symmetrized ``pi(S)`` of a bipartite 4-regular graph that stays connected after removing two edges.

    Returns the function (slots ordered colour class first) and the vertex
    order used for the slots.
    """
    edges = [tuple(int(x) for x in e) for e in edges]
    verts = sorted({v for e in edges for v in e})
    nv = len(verts)
    pos = {v: k for k, v in enumerate(verts)}
    E = [(pos[a], pos[b]) for a, b in edges]
    if any(a == b for a, b in E) or len({frozenset(e) for e in E}) != len(E):
        raise ValueError("graph must be simple")
    deg = [0] * nv
    for a, b in E:
        deg[a] += 1
        deg[b] += 1
    bad = [verts[k] for k in range(nv) if deg[k] != 4]
    if bad:
        raise ValueError("graph is not 4-regular at vertices %r" % bad)
    colour = [-1] * nv
    adj = [[] for _ in range(nv)]
    for a, b in E:
        adj[a].append(b)
        adj[b].append(a)
    for s in range(nv):
        if colour[s] >= 0:
            continue
        colour[s] = 0
        queue = deque([s])
        while queue:
            a = queue.popleft()
            for b in adj[a]:
                if colour[b] < 0:
                    colour[b] = 1 - colour[a]
                    queue.append(b)
                elif colour[b] == colour[a]:
                    raise ValueError("graph is not bipartite")
    for x, y in combinations(range(len(E)), 2):
        rest = [e for k, e in enumerate(E) if k not in (x, y)]
        if not _connected(nv, rest):
            raise ValueError("graph disconnects after removing edges %r and %r"
                             % ((verts[E[x][0]], verts[E[x][1]]), (verts[E[y][0]], verts[E[y][1]])))
    order = sorted(range(nv), key=lambda k: (colour[k], k))
    slot = {k: p for p, k in enumerate(order)}
    S = [[0] * nv for _ in range(nv)]
    for a, b in E:
        S[slot[a]][slot[b]] = S[slot[b]][slot[a]] = -1
    f = pi_product(S)
    labels = [colour[k] for k in order]
    group = group_closure(weight_group(labels), nv)
    return average(f, group), [verts[k] for k in order]
