"""Bases of regular, admissible and simple-pole function spaces.

All spaces live in degree ``-2l`` with every slot of weight 2, i.e. they are
cut out of the (4,...,4)-regular functions.  A regular function with pole
orders bounded below by ``b`` is a combination of products
``prod (z_i - z_j)^{s_ij}`` whose exponent matrix has row sums -4 and entries
``>= b``, so every space is computed inside such a span:

* indecomposable admissible functions have pole order >= -2,
* simple-pole admissible functions have pole order >= -1,
* general admissible functions are sums of products of indecomposable ones
  over set partitions into blocks of size >= 2.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import factorial
from typing import Iterable, Mapping, Sequence

from .exactlinalg import Coordinates, independent_subset, rank, relations, solve_combination
from .ratfun import RatFun, lincomb, pi_product, to_fraction

KINDS = (
    "regular",
    "admissible",
    "indecomposable",
    "simple_pole",
    "simple_pole_indecomposable",
    "ord_bounded",
)

# Pole-order floor used for coordinates of each kind.
_FLOOR = {
    "regular": -4,
    "admissible": -4,
    "indecomposable": -2,
    "simple_pole": -1,
    "simple_pole_indecomposable": -1,
}


@dataclass
class RegularMatrixSet:
    l: int
    row_target: tuple[int, ...]
    lower_bounds: tuple[tuple[int, ...], ...]
    matrices: list[tuple[tuple[int, ...], ...]]


def _bound_matrix(l: int, bounds) -> list[list[int]]:
    if isinstance(bounds, int):
        return [[bounds if i != j else 0 for j in range(l)] for i in range(l)]
    return [list(r) for r in bounds]


def enumerate_regular_matrices(l: int, n: Sequence[int] | None = None, bounds=-4) -> RegularMatrixSet:
    """All symmetric integer matrices with zero diagonal, row sums ``-n_i`` and ``s_ij >= bounds_ij``."""
    if l < 2:
        raise ValueError("need l >= 2")
    n = tuple(n) if n is not None else (4,) * l
    lo = _bound_matrix(l, bounds)
    entries = [(i, j) for i in range(l) for j in range(i + 1, l)]
    # remaining lower-bound mass of each row after position k
    rest_lo = []
    for k in range(len(entries)):
        acc = [0] * l
        for (a, b) in entries[k + 1:]:
            acc[a] += lo[a][b]
            acc[b] += lo[a][b]
        rest_lo.append(acc)
    left = [[0] * l for _ in range(len(entries))]
    for k in range(len(entries)):
        for (a, b) in entries[k + 1:]:
            left[k][a] += 1
            left[k][b] += 1
    resid = [-x for x in n]
    S = [[0] * l for _ in range(l)]
    out = []

    def rec(k: int) -> None:
        if k == len(entries):
            if all(r == 0 for r in resid):
                out.append(tuple(tuple(r) for r in S))
            return
        i, j = entries[k]
        lo_ij = lo[i][j]
        hi = min(resid[i] - rest_lo[k][i], resid[j] - rest_lo[k][j])
        if left[k][i] == 0 or left[k][j] == 0:
            # last free entry of a row is forced
            forced = {resid[i] if left[k][i] == 0 else None, resid[j] if left[k][j] == 0 else None} - {None}
            if len(forced) != 1:
                return
            v = forced.pop()
            cands = [v] if lo_ij <= v <= hi else []
        else:
            cands = range(lo_ij, hi + 1)
        for v in cands:
            S[i][j] = S[j][i] = v
            resid[i] -= v
            resid[j] -= v
            rec(k + 1)
            resid[i] += v
            resid[j] += v
        S[i][j] = S[j][i] = 0

    rec(0)
    return RegularMatrixSet(l, n, tuple(tuple(r) for r in lo), out)


def ordered_partitions(l: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All (I, J) with I, J nonempty and I + J = {0..l-1}."""
    out = []
    for mask in range(1, (1 << l) - 1):
        J = tuple(q for q in range(l) if mask >> q & 1)
        I = tuple(q for q in range(l) if not mask >> q & 1)
        out.append((I, J))
    return out


def two_block_partitions(l: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Unordered two-block partitions, smaller block first, ordered by size then lexicographically."""
    seen = []
    for I, J in ordered_partitions(l):
        a, b = (I, J) if (len(I), I) <= (len(J), J) else (J, I)
        if (a, b) not in seen:
            seen.append((a, b))
    return sorted(seen, key=lambda p: (len(p[0]), p[0]))


def set_partitions(items: Sequence[int], min_block: int = 1):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for k in range(len(rest) + 1):
        for others in combinations(rest, k):
            if k + 1 < min_block:
                continue
            remaining = [x for x in rest if x not in others]
            for tail in set_partitions(remaining, min_block):
                yield [(first,) + others] + tail


def inner_pairs(blocks: Iterable[Sequence[int]]) -> list[tuple[int, int]]:
    return sorted((a, b) for blk in blocks for a, b in combinations(sorted(blk), 2))


def _multiple_of(f: RatFun, b: RatFun) -> Fraction | None:
    """c with f = c*b when that is visible from the canonical forms, else None."""
    if f.diag != b.diag or f.mono != b.mono or len(f.num) != len(b.num):
        return None
    c = f.num.leading_coefficient() / b.num.leading_coefficient()
    return to_fraction(c) if f.num == b.num * c else None


@dataclass
class FunSpace:
    """A finite-dimensional space of functions in ``l`` variables with a fixed basis."""

    l: int
    kind: str
    basis: list[RatFun]
    floor: int = -4
    _coords: Coordinates | None = field(default=None, repr=False)
    _index: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def _vec(self, f: RatFun) -> dict[int, Fraction] | None:
        pairs = list(combinations(range(self.l), 2))
        try:
            terms = f.numerator_coords(pairs, self.floor)
        except ValueError:
            return None
        out = {}
        for e, v in terms.items():
            col = self._index.setdefault(e, len(self._index))
            out[col] = v
        return out

    def coords(self, f: RatFun) -> dict[int, Fraction] | None:
        """Coordinates of f in the basis, or None if f is outside the span."""
        if f.nvars != self.l:
            raise ValueError("function has %d variables, space has %d" % (f.nvars, self.l))
        if f.is_zero():
            return {}
        for k, b in enumerate(self.basis):
            c = _multiple_of(f, b)
            if c is not None:
                return {k: c}
        if self._coords is None:
            self._coords = Coordinates([self._vec(b) for b in self.basis])
        v = self._vec(f)
        if v is None:
            return None
        return self._coords.coords(v)

    def contains(self, f: RatFun) -> bool:
        return self.coords(f) is not None

    def element(self, coords: Mapping[int, object]) -> RatFun:
        return lincomb([(c, self.basis[k]) for k, c in coords.items()], self.l)


def function_vectors(funcs: Sequence[RatFun], floor: int) -> list[dict[int, Fraction]]:
    """Coordinate vectors of functions over the common denominator ``prod (z_i - z_j)^floor``."""
    index: dict = {}
    out = []
    for f in funcs:
        pairs = list(combinations(range(f.nvars), 2))
        v = {}
        for e, c in f.numerator_coords(pairs, floor).items():
            v[index.setdefault(e, len(index))] = c
        out.append(v)
    return out


def independent_functions(funcs: Sequence[RatFun], floor: int) -> list[int]:
    return independent_subset(function_vectors(funcs, floor))


def _condition_vectors(funcs: Sequence[RatFun], l: int, floor: int, with_zero: bool) -> list[dict]:
    """Linear conditions for admissibility: components of degree < 0 and 1 (and 0 if asked)."""
    index: dict = {}
    vecs: list[dict] = [dict() for _ in funcs]
    for I, J in ordered_partitions(l):
        pairs = inner_pairs([I, J])
        lows = [f.lowest_component_degree(I, J) for f in funcs]
        ns = list(range(min(lows), 0)) + ([0] if with_zero else []) + [1]
        for n in ns:
            for k, f in enumerate(funcs):
                if n < lows[k]:
                    continue
                comp = f.component(I, J, n)
                for e, c in comp.numerator_coords(pairs, floor).items():
                    vecs[k][index.setdefault((J, n, e), len(index))] = c
    return vecs


def is_admissible(f: RatFun, indecomposable: bool = False) -> bool:
    """Direct membership test for the admissible (or indecomposable) space."""
    l = f.nvars
    if f.is_zero():
        return True
    if not f.is_homogeneous() or f.degree() != -2 * l:
        return False
    if not f.apply_delta_star([4] * l).is_zero():
        return False
    for I, J in ordered_partitions(l):
        low = f.lowest_component_degree(I, J)
        ns = list(range(low, 0)) + ([0] if indecomposable else []) + [1]
        for n in ns:
            if n >= low and not f.component(I, J, n).is_zero():
                return False
    return True


def _span_candidates(l: int, floor: int) -> list[RatFun]:
    mats = enumerate_regular_matrices(l, bounds=floor).matrices
    funcs = [pi_product(S) for S in mats]
    keep = independent_functions(funcs, floor)
    return [funcs[k] for k in keep]


def _cut_admissible(l: int, floor: int, with_zero: bool) -> list[RatFun]:
    cands = _span_candidates(l, floor)
    if not cands:
        return []
    vecs = _condition_vectors(cands, l, floor, with_zero)
    sols = relations(vecs)
    return [lincomb([(c, cands[k]) for k, c in sorted(s.items())], l) for s in sols]


_CACHE: dict = {}


def space_basis(l: int, kind: str = "admissible", method: str | None = None,
                degree: int | None = None, floor: int | None = None) -> FunSpace:
    """Basis of one of the function spaces in ``l`` variables.

    ``method`` only matters for ``admissible``: ``"direct"`` cuts the space out
    of the span of products with pole orders >= -4, ``"products"`` assembles it
    from indecomposable pieces.  The default is direct for l <= 4.
    """
    if kind not in KINDS:
        raise ValueError("unknown kind %r" % kind)
    if kind == "ord_bounded":
        return _ord_bounded(l, degree if degree is not None else -2 * l, floor if floor is not None else -4)
    if kind == "admissible" and method is None:
        method = "direct" if l <= 4 else "products"
    key = (l, kind, method)
    if key in _CACHE:
        return _CACHE[key]
    fl = _FLOOR[kind]
    if l == 0:
        basis = [RatFun.const(0, 1)] if kind in ("regular", "admissible", "simple_pole") else []
    elif l == 1:
        basis = []
    elif kind == "regular":
        basis = _span_candidates(l, -4)
    elif kind == "admissible" and method == "direct":
        basis = _cut_admissible(l, -4, False)
    elif kind == "admissible":
        basis = _product_basis(l)
    elif kind == "indecomposable":
        # (z1 - z2)^-4 is the only indecomposable function with a pole of order 4
        fl = -4 if l == 2 else -2
        basis = _cut_admissible(l, fl, True)
    elif kind == "simple_pole":
        basis = _cut_admissible(l, -1, False)
    else:
        basis = _cut_admissible(l, -1, True)
    space = FunSpace(l, kind, basis, fl)
    _CACHE[key] = space
    return space


def _product_basis(l: int) -> list[RatFun]:
    """Products of indecomposable bases over set partitions into blocks of size >= 2."""
    out = []
    for blocks in set_partitions(range(l), min_block=2):
        pieces = [space_basis(len(b), "indecomposable").basis for b in blocks]
        if any(not p for p in pieces):
            continue
        combos = [[]]
        for blk, piece in zip(blocks, pieces):
            combos = [c + [(blk, f)] for c in combos for f in piece]
        for combo in combos:
            g = RatFun.const(l, 1)
            for blk, f in combo:
                g = g * f.embed(l, blk)
            out.append(g)
    if out and evaluation_rank(out) != len(out):
        raise ArithmeticError("product basis is not independent for l=%d" % l)
    return out


def evaluation_rank(funcs: Sequence[RatFun], extra: int = 3, seed: int = 7) -> int:
    """Rank of the matrix of exact values at seeded random rational points (a lower bound on the true rank)."""
    rng = random.Random(seed)
    l = funcs[0].nvars
    rows = []
    for _ in range(len(funcs) + extra):
        pt = [Fraction(rng.randint(-60, 60), rng.randint(1, 9)) for _ in range(l)]
        while len(set(pt)) < l or 0 in pt:
            pt = [Fraction(rng.randint(-60, 60), rng.randint(1, 9)) for _ in range(l)]
        rows.append({k: f.evaluate(pt) for k, f in enumerate(funcs)})
    return rank(rows)


def _ord_bounded(l: int, degree: int, floor: int) -> FunSpace:
    """All homogeneous functions of the given degree with pole orders >= floor."""
    pairs = list(combinations(range(l), 2))
    pdeg = degree - floor * len(pairs)
    basis = []
    if pdeg >= 0:
        for exps in _compositions(pdeg, l):
            basis.append(RatFun.from_terms(l, {exps: 1}, {p: floor for p in pairs}))
    return FunSpace(l, "ord_bounded", basis, floor)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for a in range(total, -1, -1):
        for rest in _compositions(total - a, parts - 1):
            yield (a,) + rest


def regular_kernel(l: int) -> list[RatFun]:
    """Kernel of ``Delta*(4,...,4)`` on functions of degree -2l with pole orders >= -4."""
    space = _ord_bounded(l, -2 * l, -4)
    imgs = [f.apply_delta_star([4] * l) for f in space.basis]
    vecs = function_vectors(imgs, -5) if imgs else []
    return [lincomb([(c, space.basis[k]) for k, c in sorted(s.items())], l) for s in relations(vecs)]


# -- symmetry -----------------------------------------------------------------

def group_closure(generators: Sequence[Sequence[int]], l: int) -> list[tuple[int, ...]]:
    ident = tuple(range(l))
    elems = {ident}
    frontier = [ident]
    gens = [tuple(g) for g in generators]
    while frontier:
        nxt = []
        for e in frontier:
            for g in gens:
                h = tuple(e[g[q]] for q in range(l))
                if h not in elems:
                    elems.add(h)
                    nxt.append(h)
        frontier = nxt
    return sorted(elems)


def average(f: RatFun, group: Sequence[Sequence[int]]) -> RatFun:
    return lincomb([(Fraction(1, len(group)), f.permute(g)) for g in group], f.nvars)


def symmetrize(space: FunSpace, generators: Sequence[Sequence[int]]) -> FunSpace:
    """Basis of the subspace fixed by the group generated by ``generators``."""
    group = group_closure(generators, space.l) if generators else [tuple(range(space.l))]
    imgs = [average(f, group) for f in space.basis]
    imgs = [g for g in imgs if not g.is_zero()]
    if not imgs:
        return FunSpace(space.l, space.kind, [], space.floor)
    keep = independent_functions(imgs, space.floor)
    return FunSpace(space.l, space.kind, [imgs[k] for k in keep], space.floor)


def weight_group(labels: Sequence) -> list[tuple[int, ...]]:
    """Generators (adjacent transpositions) of the stabilizer of a slot labelling."""
    l = len(labels)
    gens = []
    for q in range(l - 1):
        if labels[q] == labels[q + 1]:
            g = list(range(l))
            g[q], g[q + 1] = g[q + 1], g[q]
            gens.append(tuple(g))
    return gens


# -- factorization and reconstruction ----------------------------------------

def degree_zero_component(f: RatFun, blocks: Sequence[Sequence[int]]) -> RatFun:
    """Degree-0 component of f for a partition into any number of blocks."""
    l = f.nvars
    g = f
    for blk in list(blocks)[:-1]:
        if g.is_zero():
            break
        rest = [q for q in range(l) if q not in blk]
        g = g.component(rest, sorted(blk), 0)
    return g


def factor_indecomposables(f: RatFun, check: bool = True):
    """Expansion of an admissible function into products of indecomposable ones.

    Returns a list of ``(coefficient, [(block, factor), ...])``; each factor is
    a function of the block variables (in increasing order).
    """
    if check and not is_admissible(f):
        raise ValueError("input is not admissible")
    return _factor(f)


def _factor(f: RatFun):
    l = f.nvars
    if f.is_zero():
        return []
    out = []
    cur = f
    while not cur.is_zero():
        hit = None
        for I, J in two_block_partitions(l):
            comp = cur.component(J, I, 0)
            if not comp.is_zero():
                hit = (I, J, comp)
                break
        if hit is None:
            out.append((Fraction(1), [(tuple(range(l)), cur)]))
            break
        I, J, comp = hit
        for fi, gj in cur.split_component(J, I, 0):
            # split_component(J, I) yields (J-factor, I-factor)
            left = _factor(gj)
            right = _factor(fi)
            for ca, fa in left:
                for cb, fb in right:
                    blocks = [(tuple(I[q] for q in blk), h) for blk, h in fa]
                    blocks += [(tuple(J[q] for q in blk), h) for blk, h in fb]
                    out.append((ca * cb, sorted(blocks, key=lambda t: t[0])))
        cur = cur - comp
    return out


def assemble(l: int, expansion) -> RatFun:
    terms = []
    for c, factors in expansion:
        g = RatFun.const(l, 1)
        for blk, h in factors:
            g = g * h.embed(l, blk)
        terms.append((c, g))
    return lincomb(terms, l)


def partition_key(blocks: Iterable[Iterable[int]]) -> frozenset:
    return frozenset(frozenset(b) for b in blocks)


def components_by_partition(f: RatFun) -> dict[frozenset, RatFun]:
    """Degree-0 components over all unordered partitions with at least two blocks."""
    out = {}
    for blocks in set_partitions(range(f.nvars)):
        if len(blocks) < 2:
            continue
        out[partition_key(blocks)] = degree_zero_component(f, blocks)
    return out


def indecomposable_part(f: RatFun) -> RatFun:
    """Moebius inversion on the partition lattice: the summand of f with a single block."""
    comps = components_by_partition(f)
    terms = [(1, f)]
    for key, g in comps.items():
        p = len(key)
        terms.append(((-1) ** (p - 1) * factorial(p - 1), g))
    return lincomb(terms, f.nvars)


def reconstruct_from_parts(components: Mapping[frozenset, RatFun], l: int, check: bool = True) -> RatFun:
    """Rebuild f from its degree-0 components.

    ``components`` maps unordered partitions (frozensets of frozensets) to
    functions.  Partitions with >= 2 blocks enter the alternating sum
    ``sum (-1)^|P| (|P|-1)! f(P)``; an entry for the one-block partition, if
    present, is the indecomposable summand and is added as is.
    """
    trivial = partition_key([range(l)])
    if check:
        _check_coherence(components, l)
    terms = []
    for key, g in components.items():
        if key == trivial:
            terms.append((1, g))
            continue
        p = len(key)
        terms.append(((-1) ** p * factorial(p - 1), g))
    return lincomb(terms, l)


def _check_coherence(components: Mapping[frozenset, RatFun], l: int) -> None:
    two = [(I, J) for I, J in two_block_partitions(l)]
    for P in two:
        fp = components.get(partition_key(P))
        for Q in two:
            if P >= Q:
                continue
            fq = components.get(partition_key(Q))
            a = fp.component(Q[1], Q[0], 0) if fp is not None else RatFun.zero(l)
            b = fq.component(P[1], P[0], 0) if fq is not None else RatFun.zero(l)
            if a != b:
                raise ValueError("coherence violated for partitions %r and %r" % (P, Q))


# -- pole prescription ---------------------------------------------------------

def rho_reduced(f: RatFun, slots: Sequence[int], i: int, j: int, k: int):
    """Apply rho^(k) at original slots i<j to f, whose variables carry original labels ``slots``.

    For k = -4 the merged variable is dropped.  Returns the function and the
    labels of its variables.
    """
    a, b = slots.index(i), slots.index(j)
    g = f.rho_coefficient(a, b, k)
    rest = [s for s in slots if s != i]
    if k == -4:
        g = g.drop_variable(rest.index(j))
        rest = [s for s in rest if s != j]
    return g, rest


def _prescription_vectors(funcs_by_key: Mapping[tuple, Sequence[RatFun]]):
    """Stack functions keyed by (i, j, k) into shared coordinate vectors."""
    index: dict = {}
    width = len(next(iter(funcs_by_key.values())))
    vecs = [dict() for _ in range(width)]
    for key, funcs in funcs_by_key.items():
        nonzero = [f for f in funcs if not f.is_zero()]
        if not nonzero:
            continue
        nv = nonzero[0].nvars
        pairs = list(combinations(range(nv), 2))
        floor = {p: min([0] + [f.diag_map().get(p, 0) for f in nonzero]) for p in pairs}
        for col, f in enumerate(funcs):
            if f.is_zero():
                continue
            for e, c in f.numerator_coords(pairs, floor).items():
                vecs[col][index.setdefault((key, e), len(index))] = c
    return vecs


def check_compatibility(l: int, data: Mapping[tuple[int, int, int], RatFun]) -> None:
    slots = list(range(l))
    for (i, j, k), f in data.items():
        sf = [s for s in slots if s != i] if k == -2 else [s for s in slots if s not in (i, j)]
        for (s, t, m), g in data.items():
            if {i, j} & {s, t}:
                continue
            sg = [q for q in slots if q != s] if m == -2 else [q for q in slots if q not in (s, t)]
            a, la = rho_reduced(f, sf, s, t, m)
            b, lb = rho_reduced(g, sg, i, j, k)
            if la != lb or a != b:
                raise ValueError("incompatible pole data at (%d,%d,%d) and (%d,%d,%d)" % (i, j, k, s, t, m))


class PoleMap:
    """The linear map taking a function to its rho^(-2), rho^(-4) data, on a fixed basis."""

    def __init__(self, space: FunSpace):
        self.space = space
        l = space.l
        self.l = l
        self.keys = [(i, j, k) for i, j in combinations(range(l), 2) for k in (-2, -4)]
        slots = list(range(l))
        self.images = {key: [rho_reduced(b, slots, *key)[0] for b in space.basis] for key in self.keys}

    def _vectors(self, targets: Sequence[Mapping[tuple, RatFun]]):
        blocks = {}
        for key in self.keys:
            i, j, k = key
            nv = self.l - 1 if k == -2 else self.l - 2
            extra = [t.get(key) or RatFun.zero(nv) for t in targets]
            blocks[key] = self.images[key] + extra
        vecs = _prescription_vectors(blocks)
        n = self.space.dim
        return vecs[:n], vecs[n:]

    def solve(self, data: Mapping[tuple, RatFun]) -> RatFun | None:
        """Canonical preimage of the given pole data, or None if there is none."""
        basis_vecs, (target,) = self._vectors([data])
        sol = solve_combination(basis_vecs, target)
        if sol is None:
            return None
        return lincomb([(c, self.space.basis[k]) for k, c in sorted(sol.items())], self.l)

    def solve_many(self, datas: Sequence[Mapping[tuple, RatFun]]) -> list[RatFun | None]:
        if not datas:
            return []
        basis_vecs, targets = self._vectors(datas)
        out = []
        for t in targets:
            sol = solve_combination(basis_vecs, t)
            out.append(None if sol is None else
                       lincomb([(c, self.space.basis[k]) for k, c in sorted(sol.items())], self.l))
        return out

    def kernel(self) -> list[RatFun]:
        """Basis of the functions in the space with vanishing pole data."""
        if not self.space.dim:
            return []
        basis_vecs, _ = self._vectors([])
        return [lincomb([(c, self.space.basis[k]) for k, c in sorted(s.items())], self.l)
                for s in relations(basis_vecs)]


def prescribe_poles(l: int, data: Mapping[tuple[int, int, int], RatFun], space: FunSpace | None = None,
                    check: bool = True) -> RatFun:
    """Some admissible function with the given rho^(-2) and rho^(-4) coefficients.

    Keys are ``(i, j, k)`` with 0-based slots ``i < j`` and ``k in {-2, -4}``;
    pairs without data are required to have zero coefficients.  The rho^(-2)
    data lives on the slots without i (merged into j), the rho^(-4) data on
    the slots without i and j.
    """
    if check:
        check_compatibility(l, data)
    space = space or space_basis(l, "admissible")
    out = PoleMap(space).solve(data)
    if out is None:
        raise ValueError("pole data is not realized by an admissible function")
    return out


def pole_data(f: RatFun) -> dict[tuple[int, int, int], RatFun]:
    slots = list(range(f.nvars))
    out = {}
    for i, j in combinations(slots, 2):
        for k in (-2, -4):
            g, _ = rho_reduced(f, slots, i, j, k)
            if not g.is_zero():
                out[(i, j, k)] = g
    return out
