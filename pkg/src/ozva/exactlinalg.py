"""Exact linear algebra over the rationals on sparse coordinate vectors.

Vectors are dicts ``{column: value}``.  Elimination runs fraction-free on
integer rows (each row is kept primitive by dividing out its content), and
results are returned in reduced row echelon form with unit pivots, which
makes them independent of the order in which rows were supplied.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence

Vec = dict[int, Fraction]


def _primitive(row: dict[int, int]) -> dict[int, int]:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            break
    if g > 1:
        row = {c: v // g for c, v in row.items()}
    return row


def _to_int_row(vec: Mapping[int, object]) -> dict[int, int]:
    items = [(c, Fraction(v)) for c, v in vec.items() if v]
    if not items:
        return {}
    den = 1
    for _, v in items:
        den = lcm(den, v.denominator)
    return _primitive({c: int(v * den) for c, v in items})


def _combine(a: dict[int, int], ca: int, b: dict[int, int], cb: int) -> dict[int, int]:
    """ca*a + cb*b, dropping zeros."""
    out = {c: ca * v for c, v in a.items()}
    for c, v in b.items():
        w = out.get(c, 0) + cb * v
        if w:
            out[c] = w
        else:
            out.pop(c, None)
    return out


class Echelon:
    """Incrementally maintained reduced echelon form.

    Columns at or beyond ``limit`` are bookkeeping tags: they never become
    pivots, so a vector whose real part reduces to zero reveals a relation.
    """

    def __init__(self, limit: int | None = None):
        self.limit = limit
        self.rows: dict[int, dict[int, int]] = {}

    def _pivot_of(self, row: dict[int, int]) -> int | None:
        cols = [c for c in row if self.limit is None or c < self.limit]
        return min(cols) if cols else None

    def reduce(self, vec: Mapping[int, object]) -> dict[int, int]:
        row = _to_int_row(vec) if not _is_int_row(vec) else dict(vec)
        return self._reduce_int(row)

    def _reduce_int(self, row: dict[int, int]) -> dict[int, int]:
        hits = [c for c in row if c in self.rows]
        for c in sorted(hits):
            vc = row.get(c)
            if not vc:
                continue
            piv = self.rows[c]
            pc = piv[c]
            g = gcd(pc, vc)
            row = _combine(row, pc // g, piv, -(vc // g))
        return _primitive(row) if row else row

    def add(self, vec: Mapping[int, object]) -> int | None:
        """Insert a vector; return its new pivot column or None if dependent."""
        row = self.reduce(vec)
        p = self._pivot_of(row)
        if p is None:
            self._last_residual = row
            return None
        if row[p] < 0:
            row = {c: -v for c, v in row.items()}
        for c, other in list(self.rows.items()):
            vo = other.get(p)
            if vo:
                g = gcd(row[p], vo)
                new = _combine(other, row[p] // g, row, -(vo // g))
                new = _primitive(new)
                if new[c] < 0:
                    new = {k: -v for k, v in new.items()}
                self.rows[c] = new
        self.rows[p] = row
        self._last_residual = {}
        return p

    @property
    def rank(self) -> int:
        return len(self.rows)

    def pivots(self) -> list[int]:
        return sorted(self.rows)

    def normalized_rows(self) -> list[tuple[int, Vec]]:
        out = []
        for p in sorted(self.rows):
            row = self.rows[p]
            d = row[p]
            out.append((p, {c: Fraction(v, d) for c, v in sorted(row.items())}))
        return out


def _is_int_row(vec) -> bool:
    return all(type(v) is int for v in vec.values())


def rref(rows: Iterable[Mapping[int, object]]) -> list[tuple[int, Vec]]:
    ech = Echelon()
    for r in rows:
        ech.add(r)
    return ech.normalized_rows()


def rank(rows: Iterable[Mapping[int, object]]) -> int:
    ech = Echelon()
    for r in rows:
        ech.add(r)
    return ech.rank


def rref_kernel(rows: Sequence[Mapping[int, object]], ncols: int) -> tuple[int, "Subspace"]:
    """Rank of the matrix with the given rows and a basis of its null space."""
    red = rref(rows)
    pivots = [p for p, _ in red]
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v: Vec = {f: Fraction(1)}
        for p, row in red:
            c = row.get(f)
            if c:
                v[p] = -c
        basis.append(v)
    return len(red), Subspace(ncols, basis)


def relations(vectors: Sequence[Mapping[int, object]]) -> list[Vec]:
    """Basis of ``{c : sum_k c_k v_k = 0}`` as sparse coefficient vectors, in echelon form."""
    shift = 1 + max((c for v in vectors for c in v), default=-1)
    ech = Echelon(limit=shift)
    found = []
    for k, v in enumerate(vectors):
        row = {c: Fraction(x) for c, x in v.items() if x}
        row[shift + k] = Fraction(1)
        if ech.add(row) is None:
            res = ech._last_residual
            found.append({c - shift: v2 for c, v2 in res.items()})
    return Subspace(len(vectors), found).basis


def independent_subset(vectors: Sequence[Mapping[int, object]]) -> list[int]:
    """Indices of the first maximal independent subfamily (greedy, in order)."""
    ech = Echelon()
    keep = []
    for k, v in enumerate(vectors):
        if ech.add(v) is not None:
            keep.append(k)
    return keep


class Coordinates:
    """Express vectors in terms of a fixed independent family."""

    def __init__(self, basis: Sequence[Mapping[int, object]]):
        self.dim = len(basis)
        self.shift = 1 + max((c for v in basis for c in v), default=-1)
        ech = Echelon(limit=self.shift)
        for k, v in enumerate(basis):
            row = {c: Fraction(x) for c, x in v.items() if x}
            row[self.shift + k] = Fraction(1)
            if ech.add(row) is None:
                raise ValueError("basis vectors are linearly dependent (index %d)" % k)
        self.rows = dict(ech.normalized_rows())

    def coords(self, vec: Mapping[int, object]) -> Vec | None:
        """Coefficients c with ``sum c_k basis_k = vec``, or None if vec is outside the span."""
        cur = {c: Fraction(v) for c, v in vec.items() if v}
        if any(c >= self.shift for c in cur):
            return None
        for p in sorted(self.rows):
            c = cur.get(p)
            if not c:
                continue
            for k, v in self.rows[p].items():
                w = cur.get(k, 0) - c * v
                if w:
                    cur[k] = w
                else:
                    cur.pop(k, None)
        if any(k < self.shift for k in cur):
            return None
        # Each row reads (b-part, tags); reducing vec leaves -sum c_k tag_k.
        return {k - self.shift: -v for k, v in cur.items()}


@dataclass
class Subspace:
    """Subspace of k^ambient with a reduced echelon basis."""

    ambient: int
    basis: list[Vec] = field(default_factory=list)

    def __post_init__(self):
        red = rref(self.basis)
        self.basis = [row for _, row in red]
        self.pivots = [p for p, _ in red]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, vec: Mapping[int, object]) -> bool:
        ech = Echelon()
        for b in self.basis:
            ech.add(b)
        return not ech.reduce(vec)

    def __eq__(self, other) -> bool:
        return isinstance(other, Subspace) and self.ambient == other.ambient and self.basis == other.basis


def _check_ambient(a: Subspace, b: Subspace) -> None:
    if a.ambient != b.ambient:
        raise ValueError("ambient dimension mismatch: %d vs %d" % (a.ambient, b.ambient))


def subspace_combine(A: Subspace, B: Subspace, op: str) -> Subspace:
    _check_ambient(A, B)
    if op == "sum":
        return Subspace(A.ambient, A.basis + B.basis)
    if op == "intersect":
        # x in A and B: relations between A-basis and B-basis vectors.
        rel = relations(A.basis + B.basis)
        out = []
        na = len(A.basis)
        for r in rel:
            v: dict[int, Fraction] = {}
            for k, c in r.items():
                if k < na:
                    for col, x in A.basis[k].items():
                        v[col] = v.get(col, 0) + c * x
            out.append({c: x for c, x in v.items() if x})
        return Subspace(A.ambient, out)
    if op == "quotient_basis":
        ech = Echelon()
        for b in B.basis:
            ech.add(b)
        reps = []
        for a in A.basis:
            if ech.add(a) is not None:
                reps.append(a)
        return _raw_subspace(A.ambient, reps)
    raise ValueError("unknown operation %r" % op)


def _raw_subspace(ambient: int, vecs: list[Vec]) -> Subspace:
    s = Subspace.__new__(Subspace)
    s.ambient = ambient
    s.basis = list(vecs)
    s.pivots = []
    return s


def matvec(rows: Sequence[Mapping[int, object]], x: Mapping[int, object]) -> Vec:
    out: Vec = {}
    for i, r in enumerate(rows):
        s = sum((Fraction(v) * Fraction(x[c]) for c, v in r.items() if c in x), Fraction(0))
        if s:
            out[i] = s
    return out


def solve_preimage(rows: Sequence[Mapping[int, object]], ncols: int, target: Subspace) -> Subspace:
    """``{x : M x in target}`` for the matrix M with the given rows."""
    if target.ambient != len(rows):
        raise ValueError("target ambient %d does not match %d rows" % (target.ambient, len(rows)))
    # Columns of M as vectors, together with target basis vectors; relations give the preimage.
    cols: list[Vec] = [dict() for _ in range(ncols)]
    for i, r in enumerate(rows):
        for c, v in r.items():
            if v:
                cols[c][i] = Fraction(v)
    rel = relations(cols + target.basis)
    out = [{k: c for k, c in r.items() if k < ncols} for r in rel]
    return Subspace(ncols, [v for v in out if v])


def rank_factorization(rows: Sequence[Mapping[int, object]], ncols: int):
    """Return ``(left, right)`` with ``M = left * right`` and ``right`` the nonzero RREF rows.

    ``left[i]`` is a dict ``{r: M[i][pivot_r]}``.
    """
    red = rref(rows)
    left = []
    for r in rows:
        left.append({k: Fraction(r[p]) for k, (p, _) in enumerate(red) if r.get(p)})
    return left, [row for _, row in red]


def dense(vec: Mapping[int, object], n: int) -> list[Fraction]:
    return [Fraction(vec.get(i, 0)) for i in range(n)]


def sparse(vals: Sequence[object]) -> Vec:
    return {i: Fraction(v) for i, v in enumerate(vals) if v}


def solve_combination(vectors: Sequence[Mapping[int, object]], target: Mapping[int, object]) -> Vec | None:
    """Some c with ``sum c_k v_k = target`` (zero on dependent v_k), or None if unsolvable.

    The solution is canonical: it is the one supported on the greedy
    independent subfamily of ``vectors``.
    """
    keep = independent_subset(vectors)
    if not keep:
        return {} if not any(v for v in target.values()) else None
    coords = Coordinates([vectors[k] for k in keep]).coords(target)
    if coords is None:
        return None
    return {keep[k]: v for k, v in coords.items()}
