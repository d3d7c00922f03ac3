"""Exact rational functions with poles on coordinate diagonals.

A :class:`RatFun` in ``l`` variables is ``p(z) * z^m * prod_{i<j} (z_i - z_j)^k_ij``
where ``p`` is a polynomial with rational coefficients, ``m`` is an integer
vector (Laurent shift) and ``k_ij`` are integers.  Values are kept in a
canonical form: ``p`` is divisible by no variable and by no difference
``z_i - z_j``, so equality is structural and pole orders are read off directly.

Variables are indexed from 0 internally; the textual form uses ``z1 .. zl``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import factorial
from typing import Iterable, Mapping, Sequence

import flint

Pair = tuple[int, int]

_CTX: dict[int, flint.fmpq_mpoly_ctx] = {}


def poly_ring(nvars: int) -> flint.fmpq_mpoly_ctx:
    ctx = _CTX.get(nvars)
    if ctx is None:
        ctx = flint.fmpq_mpoly_ctx.get(("z", nvars), "degrevlex")
        _CTX[nvars] = ctx
    return ctx


def to_fmpq(x) -> flint.fmpq:
    if isinstance(x, flint.fmpq):
        return x
    if isinstance(x, int):
        return flint.fmpq(x)
    x = Fraction(x)
    return flint.fmpq(x.numerator, x.denominator)


def to_fraction(x) -> Fraction:
    if isinstance(x, flint.fmpq):
        return Fraction(int(x.p), int(x.q))
    return Fraction(x)


def binom(k: int, n: int) -> int:
    """Generalized binomial coefficient C(k, n) for any integer k and n >= 0."""
    num = 1
    for r in range(n):
        num *= k - r
    return num // factorial(n)


@lru_cache(maxsize=4096)
def _diff_power(nvars: int, a: int, b: int, k: int) -> flint.fmpq_mpoly:
    z = poly_ring(nvars).gens()
    return (z[a] - z[b]) ** k


def _monomial(nvars: int, exps: Sequence[int]) -> flint.fmpq_mpoly:
    return poly_ring(nvars).term(exp_vec=tuple(exps), coeff=flint.fmpq(1))


def _clean_diag(diag: Mapping[Pair, int]) -> tuple[tuple[Pair, int], ...]:
    return tuple(sorted((p, k) for p, k in diag.items() if k))


# memo for split_component; values are immutable tuples of pairs
_SPLIT_CACHE: dict = {}


class RatFun:
    """Canonical ``p(z) z^m prod (z_i - z_j)^k`` with exact rational coefficients."""

    __slots__ = ("nvars", "num", "mono", "diag", "_hash")

    def __init__(self, nvars: int, num, mono=None, diag=None, normalized: bool = False):
        ctx = poly_ring(nvars)
        if not isinstance(num, flint.fmpq_mpoly):
            num = ctx.constant(to_fmpq(num))
        mono = tuple(mono) if mono is not None else (0,) * nvars
        diag = dict(diag) if diag else {}
        if not normalized:
            num, mono, diag = _normalize(nvars, num, list(mono), diag)
        self.nvars = nvars
        self.num = num
        self.mono = tuple(int(m) for m in mono)
        self.diag = _clean_diag(diag) if isinstance(diag, dict) else diag
        self._hash = None

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "RatFun":
        return cls(nvars, poly_ring(nvars).constant(0), normalized=True)

    @classmethod
    def const(cls, nvars: int, c) -> "RatFun":
        c = to_fmpq(c)
        return cls(nvars, poly_ring(nvars).constant(c), normalized=True)

    @classmethod
    def variable(cls, nvars: int, i: int, power: int = 1) -> "RatFun":
        mono = [0] * nvars
        mono[i] = power
        return cls(nvars, poly_ring(nvars).constant(1), mono, normalized=True)

    @classmethod
    def diff(cls, nvars: int, i: int, j: int, k: int = 1) -> "RatFun":
        """``(z_i - z_j)^k``."""
        if i == j:
            raise ValueError("diagonal factor needs i != j")
        sign = 1
        if i > j:
            i, j = j, i
            sign = -1 if k % 2 else 1
        return cls(nvars, poly_ring(nvars).constant(sign), None, {(i, j): k}, normalized=True)

    @classmethod
    def from_terms(cls, nvars: int, terms: Mapping[Sequence[int], object], diag=None) -> "RatFun":
        """Build from a Laurent term map ``{exponents: coefficient}`` and diagonal exponents."""
        terms = {tuple(e): to_fmpq(c) for e, c in terms.items() if c}
        if not terms:
            return cls.zero(nvars)
        shift = [min(e[i] for e in terms) for i in range(nvars)]
        poly = poly_ring(nvars).from_dict(
            {tuple(a - s for a, s in zip(e, shift)): c for e, c in terms.items()}
        )
        return cls(nvars, poly, shift, diag or {})

    # -- basic queries ----------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def diag_map(self) -> dict[Pair, int]:
        return dict(self.diag)

    def order_at(self, i: int, j: int) -> int:
        if self.is_zero():
            raise ValueError("order of the zero function is undefined")
        if i > j:
            i, j = j, i
        return self.diag_map().get((i, j), 0)

    def is_homogeneous(self) -> bool:
        if self.is_zero():
            return True
        degs = {sum(m) for m in self.num.monoms()}
        return len(degs) == 1

    def degree(self) -> int:
        if self.is_zero():
            raise ValueError("degree of the zero function is undefined")
        if not self.is_homogeneous():
            raise ValueError("function is not homogeneous")
        return self.num.total_degree() + sum(self.mono) + sum(k for _, k in self.diag)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatFun):
            if isinstance(other, (int, Fraction)):
                return self == RatFun.const(self.nvars, other)
            return NotImplemented
        if self.nvars != other.nvars:
            return False
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        return self.mono == other.mono and self.diag == other.diag and self.num == other.num

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, self.mono, self.diag, str(self.num)))
        return self._hash

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other: "RatFun") -> "RatFun":
        return lincomb([(1, self), (1, other)], self.nvars)

    def __sub__(self, other: "RatFun") -> "RatFun":
        return lincomb([(1, self), (-1, other)], self.nvars)

    def __neg__(self) -> "RatFun":
        return self.scale(-1)

    def scale(self, c) -> "RatFun":
        c = to_fmpq(c)
        if c == 0 or self.is_zero():
            return RatFun.zero(self.nvars)
        return RatFun(self.nvars, self.num * c, self.mono, self.diag, normalized=True)

    def __mul__(self, other) -> "RatFun":
        if not isinstance(other, RatFun):
            return self.scale(other)
        if other.nvars != self.nvars:
            raise ValueError("nvars mismatch: %d vs %d" % (self.nvars, other.nvars))
        if self.is_zero() or other.is_zero():
            return RatFun.zero(self.nvars)
        diag = self.diag_map()
        for p, k in other.diag:
            diag[p] = diag.get(p, 0) + k
        mono = tuple(a + b for a, b in zip(self.mono, other.mono))
        # Both numerators are coprime to every z_i and z_i - z_j, hence so is the product.
        return RatFun(self.nvars, self.num * other.num, mono, _clean_diag(diag), normalized=True)

    __rmul__ = __mul__

    def disjoint_product(self, other: "RatFun") -> "RatFun":
        """``self(z_1..z_l) * other(z_{l+1}..z_{l+m})``."""
        n = self.nvars + other.nvars
        a = self.embed(n, range(self.nvars))
        b = other.embed(n, range(self.nvars, n))
        return a * b

    def embed(self, nvars: int, positions: Iterable[int]) -> "RatFun":
        """Rename variable q to ``positions[q]`` inside a ring with ``nvars`` variables."""
        positions = list(positions)
        if len(positions) != self.nvars or len(set(positions)) != self.nvars:
            raise ValueError("bad variable positions")
        ctx = poly_ring(nvars)
        z = ctx.gens()
        if self.nvars:
            num = self.num.compose(*[z[q] for q in positions], ctx=ctx)
        else:
            num = ctx.constant(to_fmpq(_const_of(self.num)))
        mono = [0] * nvars
        for q, m in enumerate(self.mono):
            mono[positions[q]] = m
        diag = {}
        sign = 1
        for (a, b), k in self.diag:
            pa, pb = positions[a], positions[b]
            if pa > pb:
                pa, pb = pb, pa
                if k % 2:
                    sign = -sign
            diag[(pa, pb)] = k
        if sign < 0:
            num = -num
        return RatFun(nvars, num, mono, _clean_diag(diag), normalized=True)

    def permute(self, sigma: Sequence[int]) -> "RatFun":
        """``(sigma f)(z_0..z_{l-1}) = f(z_sigma(0), .., z_sigma(l-1))``."""
        if sorted(sigma) != list(range(self.nvars)):
            raise ValueError("not a permutation: %r" % (sigma,))
        return self.embed(self.nvars, sigma)

    def evaluate(self, point: Sequence) -> Fraction:
        pt = [Fraction(x) for x in point]
        val = to_fraction(self.num(*[to_fmpq(x) for x in pt])) if self.nvars else _const_of(self.num)
        val = Fraction(val)
        for x, m in zip(pt, self.mono):
            val *= x ** m
        for (a, b), k in self.diag:
            val *= (pt[a] - pt[b]) ** k
        return val

    # -- calculus ---------------------------------------------------------

    def derivative(self, i: int) -> "RatFun":
        if self.is_zero():
            return self
        n = self.nvars
        z = poly_ring(n).gens()
        p = self.num
        mi = self.mono[i]
        pairs = [(pq, k) for pq, k in self.diag if i in pq]
        link = poly_ring(n).constant(1)
        for (a, b), _ in pairs:
            link *= z[a] - z[b]
        zi = z[i] if mi else 1
        total = p.derivative(i) * zi * link
        if mi:
            total += p * mi * link
        for (a, b), k in pairs:
            s = k if i == a else -k
            rest = poly_ring(n).constant(1)
            for (c, d), _ in pairs:
                if (c, d) != (a, b):
                    rest *= z[c] - z[d]
            total += p * zi * rest * s
        mono = list(self.mono)
        if mi:
            mono[i] -= 1
        diag = self.diag_map()
        for pq, k in pairs:
            diag[pq] = k - 1
        return RatFun(n, total, mono, diag)

    def apply_delta(self) -> "RatFun":
        return lincomb([(1, self.derivative(i)) for i in range(self.nvars)], self.nvars)

    def apply_delta_star(self, n: Sequence[int]) -> "RatFun":
        """``sum_i (z_i^2 d/dz_i + n_i z_i)`` applied to self."""
        if len(n) != self.nvars:
            raise ValueError("weight vector length mismatch")
        terms = []
        for i in range(self.nvars):
            terms.append((1, self.derivative(i) * RatFun.variable(self.nvars, i, 2)))
            if n[i]:
                terms.append((n[i], self * RatFun.variable(self.nvars, i)))
        return lincomb(terms, self.nvars)

    def involution(self, weights: Sequence[int] | None = None) -> "RatFun":
        """``(-1)^{sum d} prod z_i^{-2 d_i} f(1/z_1, .., 1/z_l)``."""
        n = self.nvars
        d = list(weights) if weights is not None else [2] * n
        if self.is_zero():
            return self
        if not self.is_homogeneous():
            raise ValueError("involution needs a homogeneous function")
        ctx = poly_ring(n)
        top = self.num.degrees()
        rev = ctx.from_dict({tuple(t - e for t, e in zip(top, m)): c for m, c in self.num.to_dict().items()})
        mono = [-2 * di - mi - ti for di, mi, ti in zip(d, self.mono, top)]
        sign = sum(d)
        for (a, b), k in self.diag:
            # 1/z_a - 1/z_b = -(z_a - z_b) / (z_a z_b)
            sign += k
            mono[a] -= k
            mono[b] -= k
        if sign % 2:
            rev = -rev
        return RatFun(n, rev, mono, dict(self.diag))

    def rho_coefficient(self, i: int, j: int, k: int, keep: str = "j") -> "RatFun":
        """Coefficient of ``(z_i - z_j)^k`` in the expansion of self near ``z_i = z_j``.

        With ``keep="j"`` the substitution is ``z_i = z_j + t`` and slot i is
        removed; with ``keep="i"`` it is ``z_j = z_i - t`` and slot j is removed.
        """
        if not i < j:
            raise ValueError("rho_coefficient needs i < j")
        n = self.nvars
        if self.is_zero():
            return RatFun.zero(n - 1)
        gone, stay, eps = (i, j, 1) if keep == "j" else (j, i, -1)
        newpos = [q if q < gone else q - 1 for q in range(n)]
        newpos[gone] = newpos[stay]
        m = n - 1
        diag = self.diag_map()
        base = diag.pop((i, j), 0)
        order = k - base
        if order < 0:
            return RatFun.zero(m)

        # Series factors: list of lists, entry r = RatFun coefficient of t^r.
        fixed_diag = {}
        fixed_sign = 1
        series: list[list[RatFun]] = []
        for (a, b), e in diag.items():
            if gone not in (a, b):
                pa, pb = newpos[a], newpos[b]
                fixed_diag[(pa, pb)] = e
                continue
            other = b if a == gone else a
            if a != gone and e % 2:
                fixed_sign = -fixed_sign  # (z_other - z_gone)^e = (-1)^e (z_gone - z_other)^e
            # z_gone - z_other = (z_stay - z_other) + eps t
            s0, o0 = newpos[stay], newpos[other]
            series.append([
                RatFun.diff(m, s0, o0, e - r).scale(binom(e, r) * eps ** r) for r in range(order + 1)
            ])
        fixed_mono = [0] * m
        for q, e in enumerate(self.mono):
            if q != gone:
                fixed_mono[newpos[q]] += e
        eg = self.mono[gone]
        if eg:
            s0 = newpos[stay]
            series.append([
                RatFun.variable(m, s0, eg - r).scale(binom(eg, r) * eps ** r) for r in range(order + 1)
            ])
        # Taylor coefficients of the numerator in t.
        ctx_new = poly_ring(m)
        zn = ctx_new.gens()
        subs = [zn[newpos[q]] for q in range(n)]
        pser = []
        dp = self.num
        for r in range(order + 1):
            if dp.is_zero():
                pser.append(RatFun.zero(m))
                continue
            val = dp.compose(*subs, ctx=ctx_new) * to_fmpq(Fraction(eps ** r, factorial(r)))
            pser.append(RatFun(m, val))
            dp = dp.derivative(gone)
        series.append(pser)
        coeff = _series_coefficient(series, order, m)
        if coeff.is_zero():
            return coeff
        fixed = RatFun(m, ctx_new.constant(fixed_sign), fixed_mono, _clean_diag(fixed_diag), normalized=True)
        return coeff * fixed

    def component(self, I: Sequence[int], J: Sequence[int], n: int, weights: Sequence[int] | None = None) -> "RatFun":
        """Coefficient of ``t^(n - sum_{j in J} d_j)`` in ``f(z_I, t z_J)``."""
        parts = _component_parts(self, I, J, n, weights)
        if parts is None:
            return RatFun.zero(self.nvars)
        num, mono, diag = parts
        return RatFun(self.nvars, num, mono, diag)

    def split_component(self, I: Sequence[int], J: Sequence[int], n: int, weights: Sequence[int] | None = None):
        """Minimal list of pairs ``(f_I, g_J)`` whose product-sum is the component.

        ``f_I`` is a function of the I-variables (in increasing order), ``g_J``
        of the J-variables.  The J-factors are an echelon basis of the span
        of J-parts, so they are canonical for the component.
        """
        from .exactlinalg import rank_factorization

        key = (self, tuple(I), tuple(J), n, None if weights is None else tuple(weights))
        hit = _SPLIT_CACHE.get(key)
        if hit is not None:
            return list(hit)
        comp = self.component(I, J, n, weights)
        out = [] if comp.is_zero() else split_product(comp, I, J, rank_factorization)
        if len(_SPLIT_CACHE) > 4096:
            _SPLIT_CACHE.clear()
        _SPLIT_CACHE[key] = tuple(out)
        return out

    def te_operator(self) -> "RatFun":
        """``sum_{i<l} (-(z_i - z_l)^{-1} d/dz_i + 2 (z_i - z_l)^{-2})`` applied to self in l-1 vars."""
        if not self.apply_delta().is_zero():
            raise ValueError("te_operator needs a translation invariant argument")
        l = self.nvars + 1
        beta = self.embed(l, range(l - 1))
        terms = []
        for i in range(l - 1):
            terms.append((-1, beta.derivative(i) * RatFun.diff(l, i, l - 1, -1)))
            terms.append((2, beta * RatFun.diff(l, i, l - 1, -2)))
        return lincomb(terms, l)

    def shifted_coefficient(self, I: Sequence[int], m: int) -> "RatFun":
        """Coefficient of ``x^m`` in ``f(z_I + x, z_J)`` expanded at ``x = infinity``.

        The result has no diagonal factor between I and J.
        """
        n = self.nvars
        Iset = set(I)
        if self.is_zero() or not Iset:
            return self if m == 0 else RatFun.zero(n)
        ctx = poly_ring(n)
        z = ctx.gens()
        big = poly_ring(n + 1)
        zb = big.gens()
        shifted = self.num.compose(*[zb[q] + zb[n] if q in Iset else zb[q] for q in range(n)], ctx=big)
        by_x: dict[int, dict] = {}
        for e, c in shifted.to_dict().items():
            by_x.setdefault(e[n], {})[e[:n]] = c
        dx = max(by_x)
        series = [[ctx.from_dict(by_x.get(dx - r, {})) for r in range(dx + 1)]]
        lead = dx
        mono = list(self.mono)
        factors = []  # (power k, base polynomial) for (x + base)^k
        for q in sorted(Iset):
            if mono[q]:
                factors.append((mono[q], z[q]))
                mono[q] = 0
        keep = {}
        for (a, b), k in self.diag:
            ina, inb = a in Iset, b in Iset
            if ina == inb:
                keep[(a, b)] = k
            elif ina:
                factors.append((k, z[a] - z[b]))
            else:
                # (z_a - z_b - x)^k = (-1)^k (x + z_b - z_a)^k
                factors.append((k, z[b] - z[a]))
                if k % 2:
                    series[0] = [-p for p in series[0]]
        lead += sum(k for k, _ in factors)
        depth = lead - m
        if depth < 0:
            return RatFun.zero(n)
        acc = series[0][: depth + 1] + [ctx.constant(0)] * max(0, depth + 1 - len(series[0]))
        for k, base in factors:
            fac = []
            power = ctx.constant(1)
            for r in range(depth + 1):
                fac.append(power * binom(k, r))
                power = power * base
            acc = [sum((acc[r0] * fac[r - r0] for r0 in range(r + 1) if not acc[r0].is_zero()), ctx.constant(0))
                   for r in range(depth + 1)]
        out = acc[depth]
        if out.is_zero():
            return RatFun.zero(n)
        return RatFun(n, out, mono, keep)

    def drop_variable(self, q: int) -> "RatFun":
        """Remove variable q, which self must not depend on."""
        if self.is_zero():
            return RatFun.zero(self.nvars - 1)
        if self.num.degrees()[q] or self.mono[q] or any(q in p for p, _ in self.diag):
            raise ValueError("function depends on variable %d" % (q + 1))
        keep = [i for i in range(self.nvars) if i != q]
        ctx = poly_ring(self.nvars - 1)
        z = ctx.gens()
        subs = [z[keep.index(i)] if i != q else ctx.constant(0) for i in range(self.nvars)]
        num = self.num.compose(*subs, ctx=ctx)
        mono = [self.mono[i] for i in keep]
        pos = {i: p for p, i in enumerate(keep)}
        diag = {(pos[a], pos[b]): k for (a, b), k in self.diag}
        return RatFun(self.nvars - 1, num, mono, _clean_diag(diag), normalized=True)

    def lowest_component_degree(self, I: Sequence[int], J: Sequence[int], weights: Sequence[int] | None = None) -> int:
        """Smallest n for which ``component(I, J, n)`` can be nonzero."""
        d = list(weights) if weights is not None else [2] * self.nvars
        Jset = set(J)
        shift = sum(k for (a, b), k in self.diag if a in Jset and b in Jset)
        shift += sum(self.mono[j] for j in J)
        low = min(sum(m[j] for j in J) for m in self.num.monoms())
        return shift + low + sum(d[j] for j in J)

    def numerator_coords(self, pairs: Iterable[Pair], bound) -> dict[tuple[int, ...], Fraction]:
        """Laurent terms of ``self * prod_{(a,b) in pairs} (z_a - z_b)^(-bound)``.

        ``bound`` is an int or a map pair -> int; self must have no diagonal
        factor outside ``pairs`` and order at least the bound on each pair.
        """
        pairs = list(pairs)
        if self.is_zero():
            return {}
        fd = self.diag_map()
        poly = self.num
        for p in pairs:
            b = bound if isinstance(bound, int) else bound[p]
            e = fd.pop(p, 0) - b
            if e < 0:
                raise ValueError("order %d below bound %d at %r" % (e + b, b, p))
            if e:
                poly = poly * _diff_power(self.nvars, p[0], p[1], e)
        if fd:
            raise ValueError("unexpected diagonal factors %r" % (fd,))
        return {
            tuple(e + s for e, s in zip(m, self.mono)): to_fraction(c)
            for m, c in poly.to_dict().items()
        }

    # -- serialization ----------------------------------------------------

    def expanded_terms(self, pairs: Iterable[Pair]) -> tuple[dict[tuple[int, ...], Fraction], dict[Pair, int]]:
        """Laurent terms with the (non-negative) diagonal factors on ``pairs`` multiplied out.

        Returns the term map and the remaining diagonal exponents.
        """
        fd = self.diag_map()
        poly = self.num
        for p in pairs:
            k = fd.pop(p, 0)
            if k < 0:
                raise ValueError("pole of order %d at %r cannot be expanded" % (-k, p))
            if k:
                poly = poly * _diff_power(self.nvars, p[0], p[1], k)
        terms = {tuple(e + s for e, s in zip(m, self.mono)): to_fraction(c) for m, c in poly.to_dict().items()}
        return terms, fd

    def term_map(self) -> dict[tuple[int, ...], Fraction]:
        """Laurent terms of ``p(z) z^m`` (the diagonal factors are not expanded)."""
        return {
            tuple(e + s for e, s in zip(m, self.mono)): to_fraction(c)
            for m, c in self.num.to_dict().items()
        }

    def to_json(self) -> dict:
        terms = []
        for exps, c in sorted(self.term_map().items(), reverse=True):
            mon = " ".join("z%d^%d" % (q + 1, e) for q, e in enumerate(exps) if e)
            terms.append("%s * %s" % (c, mon) if mon else str(c))
        return {
            "nvars": self.nvars,
            "terms": terms,
            "diag": [[a + 1, b + 1, k] for (a, b), k in self.diag],
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "RatFun":
        n = int(doc["nvars"])
        terms: dict[tuple[int, ...], Fraction] = {}
        for t in doc["terms"]:
            coef, _, mon = t.partition(" * ")
            exps = [0] * n
            for piece in mon.split():
                var, _, e = piece.partition("^")
                exps[int(var[1:]) - 1] += int(e or 1)
            key = tuple(exps)
            terms[key] = terms.get(key, 0) + Fraction(coef)
        diag = {(a - 1, b - 1): k for a, b, k in doc["diag"]}
        return cls.from_terms(n, terms, diag)

    def __repr__(self) -> str:
        if self.is_zero():
            return "RatFun(0)"
        doc = self.to_json()
        num = " + ".join(doc["terms"])
        den = " ".join("(z%d-z%d)^%d" % (a, b, k) for a, b, k in doc["diag"])
        return "RatFun[%d](%s)%s" % (self.nvars, num, " * " + den if den else "")


def _const_of(p) -> Fraction:
    d = p.to_dict()
    return to_fraction(next(iter(d.values()))) if d else Fraction(0)


def _normalize(nvars: int, num, mono: list[int], diag: dict[Pair, int]):
    if num.is_zero():
        return num, [0] * nvars, {}
    if nvars == 0:
        return num, mono, {}
    content = num.term_content()
    cexp = content.monoms()[0]
    if any(cexp):
        num = num / _monomial(nvars, cexp)
        mono = [m + c for m, c in zip(mono, cexp)]
    z = poly_ring(nvars).gens()
    degs = num.degrees()
    for a, b in combinations(range(nvars), 2):
        if not degs[a] or not degs[b]:
            continue
        subs = list(z)
        subs[a] = z[b]
        while True:
            if not num.compose(*subs).is_zero():
                break
            num = num / (z[a] - z[b])
            diag[(a, b)] = diag.get((a, b), 0) + 1
        degs = num.degrees()
    return num, mono, diag


def lincomb(terms: Iterable[tuple[object, RatFun]], nvars: int | None = None) -> RatFun:
    """Exact ``sum c_i f_i`` over a common denominator, normalized once."""
    items = [(to_fmpq(c), f) for c, f in terms if c and not f.is_zero()]
    if not items:
        if nvars is None:
            raise ValueError("empty combination needs nvars")
        return RatFun.zero(nvars)
    n = items[0][1].nvars
    if any(f.nvars != n for _, f in items):
        raise ValueError("nvars mismatch in linear combination")
    if len(items) == 1:
        return items[0][1].scale(items[0][0])
    mono = [min(f.mono[q] for _, f in items) for q in range(n)]
    diag: dict[Pair, int] = {}
    for _, f in items:
        for p, _k in f.diag:
            diag.setdefault(p, 0)
    for p in diag:
        diag[p] = min(f.diag_map().get(p, 0) for _, f in items)
    total = poly_ring(n).constant(0)
    for c, f in items:
        poly = f.num * c
        shift = [a - b for a, b in zip(f.mono, mono)]
        if any(shift):
            poly = poly * _monomial(n, shift)
        fd = f.diag_map()
        for (a, b), k0 in diag.items():
            e = fd.get((a, b), 0) - k0
            if e:
                poly = poly * _diff_power(n, a, b, e)
        total += poly
    return RatFun(n, total, mono, diag)


def _series_coefficient(series: list[list[RatFun]], order: int, nvars: int) -> RatFun:
    """Coefficient of t^order in the product of truncated series."""
    acc: dict[int, list[tuple[int, RatFun]]] = {0: [(1, RatFun.const(nvars, 1))]}
    for ser in series:
        nxt: dict[int, list[tuple[int, RatFun]]] = {}
        for r0, fs in acc.items():
            for r in range(order - r0 + 1):
                if r >= len(ser) or ser[r].is_zero():
                    continue
                bucket = nxt.setdefault(r0 + r, [])
                for c, f in fs:
                    bucket.append((c, f * ser[r]))
        acc = {r: [(1, lincomb(fs, nvars))] for r, fs in nxt.items()}
    fs = acc.get(order)
    if not fs:
        return RatFun.zero(nvars)
    return fs[0][1]


def _laurent_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            v = out.get(e, 0) + ca * cb
            if v:
                out[e] = v
            else:
                out.pop(e, None)
    return out


def _component_parts(f: RatFun, I, J, n, weights):
    """Numerator, Laurent shift and diagonal exponents of a component, or None if zero."""
    nv = f.nvars
    I, J = sorted(I), sorted(J)
    if sorted(I + J) != list(range(nv)) or not J:
        raise ValueError("invalid partition")
    if f.is_zero():
        return None
    d = list(weights) if weights is not None else [2] * nv
    target = n - sum(d[j] for j in J)
    Jset = set(J)
    keep_diag: dict[Pair, int] = {}
    cross = []
    shift = 0
    for (a, b), k in f.diag:
        ina, inb = a in Jset, b in Jset
        if ina and inb:
            keep_diag[(a, b)] = k
            shift += k
        elif not ina and not inb:
            keep_diag[(a, b)] = k
        else:
            cross.append((a, b, k))
    shift += sum(f.mono[j] for j in J)
    # Split numerator by J-degree.
    by_deg: dict[int, dict] = {}
    for m, c in f.num.to_dict().items():
        s = sum(m[j] for j in J)
        by_deg.setdefault(s, {})[m] = c
    low = min(by_deg)
    rmax = target - shift - low
    if rmax < 0:
        return None
    # Cross factors (z_a - t z_b)^k, a in I and b in J, as polynomials in (z, t) truncated at t^rmax.
    # Each is z_a^(k - rmax) times sum_r C(k, r) (-t z_b)^r z_a^(rmax - r).
    ctx1 = poly_ring(nv + 1)
    ser = ctx1.constant(1)
    lo = [0] * nv
    for a, b, k in cross:
        if a in Jset:
            ia, jb, sign = b, a, (-1 if k % 2 else 1)
        else:
            ia, jb, sign = a, b, 1
        fac = {}
        for r in range(rmax + 1):
            e = [0] * (nv + 1)
            e[ia] = rmax - r
            e[jb] = r
            e[nv] = r
            fac[tuple(e)] = sign * binom(k, r) * (-1 if r % 2 else 1)
        ser = ser * ctx1.from_dict(fac)
        if ser.degrees()[nv] > rmax:
            ser = ctx1.from_dict({m: c for m, c in ser.to_dict().items() if m[nv] <= rmax})
        lo[ia] += k - rmax
    by_t: dict[int, dict] = {}
    for m, c in ser.to_dict().items():
        by_t.setdefault(m[nv], {})[m[:nv]] = c
    ctx = poly_ring(nv)
    total = ctx.constant(0)
    for s, terms in by_deg.items():
        r = target - shift - s
        if r < 0 or r > rmax or r not in by_t:
            continue
        total += ctx.from_dict(terms) * ctx.from_dict(by_t[r])
    if total.is_zero():
        return None
    mono = [m + x for m, x in zip(f.mono, lo)]
    return total, mono, keep_diag


def split_product(comp: RatFun, I: Sequence[int], J: Sequence[int], factorize):
    """Write a function whose negative diagonal factors live inside I or inside J as sum f_I(z_I) g_J(z_J)."""
    terms, diag = comp.expanded_terms(cross_pairs(comp.nvars, I, J))
    return split_terms(comp.nvars, terms, diag, I, J, factorize)


def cross_pairs(nvars: int, I: Sequence[int], J: Sequence[int]) -> list[Pair]:
    Iset = set(I)
    return [(a, b) for a, b in combinations(range(nvars), 2) if (a in Iset) != (b in Iset)]


def split_terms(nvars: int, terms: Mapping[tuple, Fraction], diag: Mapping[Pair, int], I, J, factorize):
    """``split_product`` on an explicit Laurent term map with diagonal factors inside I or J."""
    I, J = sorted(I), sorted(J)
    rows: dict[tuple, dict[tuple, Fraction]] = {}
    for exps, c in terms.items():
        if not c:
            continue
        ei = tuple(exps[q] for q in I)
        ej = tuple(exps[q] for q in J)
        rows.setdefault(ei, {})[ej] = c
    if not rows:
        return []
    row_keys = sorted(rows)
    col_keys = sorted({e for r in rows.values() for e in r})
    colpos = {e: p for p, e in enumerate(col_keys)}
    mat = [{colpos[e]: c for e, c in rows[k].items()} for k in row_keys]
    left, right = factorize(mat, len(col_keys))
    posI = {q: p for p, q in enumerate(I)}
    posJ = {q: p for p, q in enumerate(J)}
    for (a, b) in diag:
        if (a in posI) != (b in posI):
            raise ValueError("diagonal factor (%d,%d) crosses the split" % (a, b))
    diag_i = {(posI[a], posI[b]): k for (a, b), k in diag.items() if a in posI}
    diag_j = {(posJ[a], posJ[b]): k for (a, b), k in diag.items() if a in posJ}
    out = []
    for r in range(len(right)):
        fi = RatFun.from_terms(len(I), {row_keys[p]: col[r] for p, col in enumerate(left) if col.get(r)}, diag_i)
        gj = RatFun.from_terms(len(J), {col_keys[c]: v for c, v in right[r].items()}, diag_j)
        out.append((fi, gj))
    return out


def pi_product(S: Sequence[Sequence[int]]) -> RatFun:
    """``prod_{i<j} (z_i - z_j)^{S_ij}`` for a symmetric integer matrix with zero diagonal."""
    n = len(S)
    for i in range(n):
        if len(S[i]) != n:
            raise ValueError("matrix is not square")
        if S[i][i]:
            raise ValueError("nonzero diagonal entry at %d" % (i + 1))
        for j in range(i + 1, n):
            if S[i][j] != S[j][i]:
                raise ValueError("matrix is not symmetric at (%d,%d)" % (i + 1, j + 1))
    diag = {(i, j): S[i][j] for i in range(n) for j in range(i + 1, n) if S[i][j]}
    return RatFun(n, poly_ring(n).constant(1), None, _clean_diag(diag), normalized=True)


def vacuum_product(nvars: int) -> RatFun:
    return RatFun.const(nvars, 1)
