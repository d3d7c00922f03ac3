"""Exact verification suites over a vertex truncation.

Every instance is evaluated from the tables; an instance that would touch a
state outside the cutoffs is counted as skipped.  Identities whose two sides
live in different weights are compared in the glued algebra, which is also
the fallback for the vertex-algebra axioms (the report counts how often it
was needed).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, product
from math import factorial
from typing import Callable, Sequence

from .coalgebra import (
    CoalgebraTower,
    GriessAlgebraInput,
    TowerError,
    coproduct_rank_test,
    graph_generator,
)
from .funspaces import two_block_partitions
from .exactlinalg import rank as matrix_rank, solve_combination
from .ratfun import RatFun
from .vertexbuild import CutoffError, State, VertexTruncation

K44_EDGES = [(a, b) for a in range(4) for b in range(4, 8)]


def gbinom(m: int, i: int) -> Fraction:
    """Generalized binomial coefficient C(m, i) for any integer m and i >= 0."""
    num = 1
    for k in range(i):
        num *= m - k
    return Fraction(num, factorial(i))


@dataclass
class Ranges:
    modes: tuple[int, ...] = tuple(range(-4, 7))
    max_degree: int | None = None
    max_length: int | None = None
    # left-hand states of composite products are taken up to this degree
    left_degree: int = 4


@dataclass
class CheckReport:
    suite: str
    attempted: int = 0
    passed: int = 0
    skipped: int = 0
    glued: int = 0
    nontrivial: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def record(self, name: str, ok: bool, witness: dict | None = None) -> None:
        self.attempted += 1
        if ok:
            self.passed += 1
        else:
            self.failures.append(dict(check=name, **(witness or {})))

    def merge(self, other: "CheckReport") -> "CheckReport":
        self.attempted += other.attempted
        self.passed += other.passed
        self.skipped += other.skipped
        self.glued += other.glued
        self.nontrivial += other.nontrivial
        self.failures.extend(other.failures)
        return self

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "attempted": self.attempted,
            "passed": self.passed,
            "skipped": self.skipped,
            "glued": self.glued,
            "nontrivial": self.nontrivial,
            "failures": self.failures,
        }

    def summary(self) -> str:
        extra = " (%d with nonzero sides)" % self.nontrivial if self.nontrivial else ""
        return "%s: %d/%d passed%s, %d skipped%s" % (
            self.suite, self.passed, self.attempted, extra, self.skipped,
            "" if self.ok else ", %d failures" % len(self.failures),
        )


def _same(T: VertexTruncation, rep: CheckReport, lhs: State, rhs: State, glue: bool, length: int | None) -> bool:
    if lhs == rhs:
        return True
    if glue and T.glued_equal(lhs, rhs, length):
        rep.glued += 1
        return True
    return False


def _instance(T, rep: CheckReport, name: str, params: dict, sides: Callable[[], tuple[State, State]],
              glue: bool = True, length: int | None = None):
    """Evaluate one identity; ``length`` is the largest weight length it involves (fixes the glue probes)."""
    try:
        lhs, rhs = sides()
        ok = _same(T, rep, lhs, rhs, glue, length)
    except CutoffError:
        rep.skipped += 1
        return
    witness = None if ok else {"params": params, "lhs": lhs.to_json(), "rhs": rhs.to_json()}
    rep.record(name, ok, witness)
    if not (lhs.is_zero() and rhs.is_zero()):
        rep.nontrivial += 1


def basis_states(T: VertexTruncation, max_degree: int | None = None, max_length: int | None = None):
    """``(label, state)`` for every basis vector of every piece within the cutoffs."""
    top_d = T.D if max_degree is None else min(max_degree, T.D)
    out = []
    for lam in T.weights(max_length):
        for d in range(top_d + 1):
            for u in range(T.dim(lam, d)):
                out.append(((lam, d, u), T.basis_state(lam, d, u)))
    return out


def _deg(x: State) -> int:
    (d,) = x.degrees()
    return d


def _len(x: State) -> int:
    return max(len(w) for w, _ in x.parts)


def _fits(T, length: int, degree: int) -> bool:
    return length <= T.L and degree <= T.D


def _Dpow(T: VertexTruncation, x: State, k: int) -> State:
    return T.translate(x, k)


def _resolve(T: VertexTruncation, ranges: Ranges | None) -> Ranges:
    r = ranges or Ranges()
    return Ranges(r.modes, T.D if r.max_degree is None else min(r.max_degree, T.D),
                  T.L if r.max_length is None else min(r.max_length, T.L), r.left_degree)


# -- unit, translation, sl2 ------------------------------------------------------------------

def check_unit_translation(T: VertexTruncation, ranges: Ranges | None = None) -> CheckReport:
    r = _resolve(T, ranges)
    rep = CheckReport("unit_translation")
    unit = T.unit()
    states = basis_states(T, r.max_degree, r.max_length)
    left = [(k, x) for k, x in states if k[1] <= r.left_degree and k[0]]
    gens = [(g, T.generator_state(g)) for g in range(T.gens.size)]

    rep.record("Dstar unit", T.sl2_action("Dstar", unit).is_zero())
    for g, a in gens:
        rep.record("Dstar generator", T.sl2_action("Dstar", a).is_zero(), {"params": {"g": g}})
        _instance(T, rep, "a(-1)1 = a", {"g": g}, lambda a=a: (T.state_product(a, -1, unit), a), length=1)
    for key, w in states:
        lam, d, u = key
        for n in r.modes:
            if d - n - 1 > r.max_degree:
                continue
            _instance(T, rep, "1(n)w", {"w": key, "n": n},
                      lambda w=w, n=n: (T.state_product(unit, n, w), w if n == -1 else State()), glue=False)
        # sl2 relation and grading
        _instance(T, rep, "[D*,D] = 2 delta", {"w": key},
                  lambda w=w: (T.sl2_action("Dstar", T.sl2_action("D", w)) - T.sl2_action("D", T.sl2_action("Dstar", w)),
                               T.sl2_action("delta", w).scale(2)), glue=False)
    for key, a in left:
        for n in r.modes:
            if n < 0 and key[1] - n - 1 > r.max_degree:
                continue
            _instance(T, rep, "a(n)1", {"a": key, "n": n},
                      lambda a=a, n=n: (T.state_product(a, n, unit), _Dpow(T, a, -n - 1) if n < 0 else State()),
                      length=len(key[0]))
    # translation covariance (both forms)
    for (ka, a), (kw, w) in product(left, states):
        if len(ka[0]) + len(kw[0]) > r.max_length:
            continue
        for n in r.modes:
            deg = ka[1] + kw[1] - n
            if deg < 0 or deg > r.max_degree:
                continue
            _instance(T, rep, "(Da)(n)w = -n a(n-1)w", {"a": ka, "w": kw, "n": n},
                      lambda a=a, w=w, n=n: (T.state_product(T.sl2_action("D", a), n, w),
                                             T.state_product(a, n - 1, w).scale(-n)),
                      length=len(ka[0]) + len(kw[0]))
            _instance(T, rep, "D(a(n)w) = (Da)(n)w + a(n)Dw", {"a": ka, "w": kw, "n": n},
                      lambda a=a, w=w, n=n: (T.sl2_action("D", T.state_product(a, n, w)),
                                             T.state_product(T.sl2_action("D", a), n, w) + T.state_product(a, n, T.sl2_action("D", w))),
                      length=len(ka[0]) + len(kw[0]))
    # [D*, a(m)] = (2 deg a - m - 2) a(m+1) for minimal generators of degree 2
    for g, a in gens:
        for kx, x in states:
            if len(kx[0]) + 1 > r.max_length:
                continue
            for m in r.modes:
                if kx[1] + 1 - m > r.max_degree or kx[1] + 1 - m < 0:
                    continue
                _instance(T, rep, "[D*, a(m)]", {"g": g, "x": kx, "m": m},
                          lambda g=g, x=x, m=m: (
                              T.sl2_action("Dstar", T.generator_action(g, m, x)) - T.generator_action(g, m, T.sl2_action("Dstar", x)),
                              T.generator_action(g, m + 1, x).scale(2 - m)), glue=False)
    return rep


# -- commutator, quasi-symmetry, associativity ------------------------------------------------

def _commutator_sides(T: VertexTruncation, a: int, m: int, b: int, n: int, c: State):
    A, B = T.generator_state(a), T.generator_state(b)
    lhs = T.generator_action(a, m, T.generator_action(b, n, c)) - T.generator_action(b, n, T.generator_action(a, m, c))
    rhs = State()
    for s in range(0, 4):
        ab = T.state_product(A, s, B)
        if ab.is_zero():
            continue
        rhs = rhs + T.state_product(ab, m + n - s, c).scale(gbinom(m, s))
    return lhs, rhs


def _quasi_symmetry_sides(T: VertexTruncation, u: State, n: int, w: State):
    du, dw = _deg(u), _deg(w)
    rhs = State()
    for i in range(0, du + dw - n):
        t = T.state_product(w, n + i, u)
        if t.is_zero():
            continue
        sign = -1 if (n + i + 1) % 2 else 1
        rhs = rhs + T.translate(t, i).scale(sign)
    return T.state_product(u, n, w), rhs


def _assoc_sides(T: VertexTruncation, a: int, m: int, b: int, n: int, c: State):
    A, B = T.generator_state(a), T.generator_state(b)
    dc = _deg(c)
    lhs = T.state_product(T.state_product(A, m, B), n, c)
    rhs = State()
    top = max(2 + dc - n, 2 + dc)
    if m >= 0:
        top = min(top, m + 1)
    for i in range(0, top):
        coef = gbinom(m, i) * (-1) ** i
        if not coef:
            continue
        t1 = T.generator_action(a, m - i, T.generator_action(b, n + i, c))
        t2 = T.generator_action(b, m + n - i, T.generator_action(a, i, c))
        rhs = rhs + (t1 - t2.scale((-1) ** (m % 2))).scale(coef)
    return lhs, rhs


def check_commutator(T: VertexTruncation, ranges: Ranges | None = None) -> CheckReport:
    r = _resolve(T, ranges)
    rep = CheckReport("commutator")
    G = range(T.gens.size)
    states = basis_states(T, r.max_degree, r.max_length)
    # locality for generator pairs
    for a, b in product(G, G):
        for n in r.modes:
            if n < 4:
                continue
            _instance(T, rep, "a(n)b = 0 for n >= 4", {"a": a, "b": b, "n": n},
                      lambda a=a, b=b, n=n: (T.state_product(T.generator_state(a), n, T.generator_state(b)), State()), glue=False)
    for a, b in product(G, G):
        for kc, c in states:
            lc, dc = len(kc[0]), kc[1]
            if lc + 2 > r.max_length:
                continue
            for m, n in product(r.modes, r.modes):
                deg = dc + 2 - m - n
                if deg < 0 or deg > r.max_degree:
                    continue
                params = {"a": a, "m": m, "b": b, "n": n, "c": kc}
                _instance(T, rep, "commutator", params, lambda a=a, m=m, b=b, n=n, c=c: _commutator_sides(T, a, m, b, n, c),
                          length=lc + 2)
                _instance(T, rep, "associativity", params, lambda a=a, m=m, b=b, n=n, c=c: _assoc_sides(T, a, m, b, n, c),
                          length=lc + 2)
    left = [(k, x) for k, x in states if k[1] <= r.left_degree]
    for (ku, u), (kw, w) in product(left, left):
        if not ku[0] or not kw[0] or len(ku[0]) + len(kw[0]) > r.max_length:
            continue
        for n in r.modes:
            deg = ku[1] + kw[1] - n - 1
            if deg < 0 or deg > r.max_degree:
                continue
            _instance(T, rep, "quasi-symmetry", {"u": ku, "n": n, "w": kw},
                      lambda u=u, n=n, w=w: _quasi_symmetry_sides(T, u, n, w), length=len(ku[0]) + len(kw[0]))
    return rep


# -- Virasoro -------------------------------------------------------------------------------

def check_virasoro(T: VertexTruncation, ranges: Ranges | None = None) -> CheckReport:
    if T.gens.omega is None:
        raise ValueError("input algebra has no unit")
    r = _resolve(T, ranges)
    rep = CheckReport("virasoro")
    w = T.gens.omega
    W = T.omega_state()
    c = 2 * T.gens.form[w][w]
    unit = T.unit()
    expected = {0: lambda: T.sl2_action("D", W), 1: lambda: W.scale(2), 2: State, 3: lambda: unit.scale(c / 2)}
    for n in range(0, 7):
        exp = expected.get(n, State)
        _instance(T, rep, "omega(%d)omega" % n, {"n": n}, lambda n=n, exp=exp: (T.state_product(W, n, W), exp()), length=2)
    for g in range(T.gens.size):
        A = T.generator_state(g)
        _instance(T, rep, "a(0)omega = Da", {"g": g}, lambda A=A: (T.state_product(A, 0, W), T.sl2_action("D", A)), length=2)
        _instance(T, rep, "a(1)omega = 2a", {"g": g}, lambda A=A: (T.state_product(A, 1, W), A.scale(2)), length=2)
    for key, u in basis_states(T, r.max_degree, r.max_length - 1):
        lam, d, _ = key
        _instance(T, rep, "omega(1)u = deg(u) u", {"u": key}, lambda u=u, d=d: (T.generator_action(w, 1, u), u.scale(d)), length=len(lam) + 1)
        if d + 1 <= r.max_degree:
            _instance(T, rep, "omega(0)u = Du", {"u": key}, lambda u=u: (T.generator_action(w, 0, u), T.sl2_action("D", u)), length=len(lam) + 1)
    return rep


# -- Griess algebra recovery -----------------------------------------------------------------

def recover_griess(T: VertexTruncation) -> tuple[list, list]:
    """Product and form on A read off from a(1)b and a(3)b in the glued algebra.

    Returns ``(P, F)`` in input coordinates; ``P[i][j]`` is a coordinate list
    or None when a(1)b is not in the span of A.
    """
    alg = T.gens.alg
    n = alg.dim
    states = [T.algebra_state(alg.basis_vector(i)) for i in range(n)]
    vecs = [T.glue_vector(s, T.L - 2) for s in states]
    keys = {k: p for p, k in enumerate(sorted({k for v in vecs for k in v}, key=repr))}
    cols = [{keys[k]: c for k, c in v.items()} for v in vecs]
    unit_vec = T.glue_vector(T.unit(), T.L - 2)
    P = [[None] * n for _ in range(n)]
    F = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            v = T.glue_vector(T.state_product(states[i], 1, states[j]), T.L - 2)
            if any(k not in keys for k in v):
                continue
            sol = solve_combination(cols, {keys[k]: c for k, c in v.items()})
            if sol is not None:
                P[i][j] = [sol.get(k, Fraction(0)) for k in range(n)]
            s = T.glue_vector(T.state_product(states[i], 3, states[j]), T.L - 2)
            if not s:
                F[i][j] = Fraction(0)
            elif set(s) == set(unit_vec):
                ratios = {s[k] / unit_vec[k] for k in unit_vec}
                if len(ratios) == 1:
                    F[i][j] = ratios.pop()
    return P, F


def check_griess(T: VertexTruncation, alg: GriessAlgebraInput | None = None) -> CheckReport:
    alg = alg or T.gens.alg
    rep = CheckReport("griess")
    n = alg.dim
    states = [T.algebra_state(alg.basis_vector(i)) for i in range(n)]
    # A embeds in V_2
    vecs = [T.glue_vector(s, T.L - 2) for s in states]
    keys = {k: p for p, k in enumerate(sorted({k for v in vecs for k in v}, key=repr))}
    rank = matrix_rank([{keys[k]: c for k, c in v.items()} for v in vecs])
    rep.record("A embeds in V_2", rank == n, {"rank": rank, "dim": n})
    for i in range(n):
        for j in range(n):
            prod_ij = T.algebra_state(alg.mul(alg.basis_vector(i), alg.basis_vector(j)))
            _instance(T, rep, "a(1)b = ab", {"i": i, "j": j},
                      lambda i=i, j=j, p=prod_ij: (T.state_product(states[i], 1, states[j]), p), length=2)
            _instance(T, rep, "a(3)b = <a,b>", {"i": i, "j": j},
                      lambda i=i, j=j: (T.state_product(states[i], 3, states[j]), T.unit().scale(alg.form[i][j])), length=2)
            _instance(T, rep, "a(3)b = b(3)a", {"i": i, "j": j},
                      lambda i=i, j=j: (T.state_product(states[i], 3, states[j]), T.state_product(states[j], 3, states[i])),
                      length=2)
    P, F = recover_griess(T)
    for i in range(n):
        for j in range(n):
            rep.record("recovered product", P[i][j] == [Fraction(x) for x in alg.product[i][j]],
                       {"i": i, "j": j, "recovered": _fmt_vec(P[i][j]), "input": _fmt_vec(alg.product[i][j])})
            rep.record("recovered form", F[i][j] == alg.form[i][j], {"i": i, "j": j, "recovered": str(F[i][j])})
    if all(P[i][j] is not None and F[i][j] is not None for i in range(n) for j in range(n)):
        def mul(u, v):
            out = [Fraction(0)] * n
            for i, x in enumerate(u):
                for j, y in enumerate(v):
                    if x and y:
                        for k, z in enumerate(P[i][j]):
                            out[k] += x * y * z
            return out

        def pair(u, v):
            return sum((x * y * F[i][j] for i, x in enumerate(u) for j, y in enumerate(v) if x and y), Fraction(0))

        e = [alg.basis_vector(i) for i in range(n)]
        for i, j in combinations_with_replacement(range(n), 2):
            rep.record("recovered symmetry", P[i][j] == P[j][i] and F[i][j] == F[j][i], {"i": i, "j": j})
        for i, j, k in product(range(n), repeat=3):
            rep.record("recovered invariance", pair(mul(e[i], e[j]), e[k]) == pair(e[i], mul(e[j], e[k])),
                       {"i": i, "j": j, "k": k})
        for s, sigma in enumerate(alg.automorphisms):
            img = [[sigma[r][c] for r in range(n)] for c in range(n)]
            for i in range(n):
                for j in range(n):
                    lhs = mul(img[i], img[j])
                    rhs = _apply(sigma, P[i][j])
                    rep.record("recovered product equivariance", lhs == rhs, {"automorphism": s, "i": i, "j": j})
                    rep.record("recovered form equivariance", pair(img[i], img[j]) == F[i][j],
                               {"automorphism": s, "i": i, "j": j})
    for s, sigma in enumerate(alg.automorphisms):
        bad = list(correlation_equivariance(T.tower, sigma, T.L))
        rep.record("correlation equivariance", not bad, {"automorphism": s, "weights": bad})
    return rep


def _apply(sigma, v):
    n = len(v)
    return [sum((Fraction(sigma[r][c]) * v[c] for c in range(n)), Fraction(0)) for r in range(n)]


def _fmt_vec(v):
    return None if v is None else [str(Fraction(x)) for x in v]


def correlation_equivariance(tower: CoalgebraTower, sigma, max_length: int):
    """Yield the weights where the vacuum correlation function is not invariant under sigma."""
    gens = tower.gens
    images = [gens.coords(_apply(sigma, v)) for v in gens.vectors]
    for l in range(1, max_length + 1):
        for lam in tower.weights(l):
            tensor = {(): Fraction(1)}
            for g in lam:
                tensor = {w + (h,): c * x for w, c in tensor.items() for h, x in images[g].items()}
            tensor = {w: c for w, c in tensor.items() if c}
            lhs = tower.phi(0, tensor) if tensor else RatFun.zero(l)
            if lhs != tower.value(0, lam):
                yield list(lam)


# -- B_0 polynomiality -------------------------------------------------------------------------

def check_b0_polynomiality(tower: CoalgebraTower, max_length: int | None = None, witness: bool = True) -> CheckReport:
    rep = CheckReport("b0_polynomiality")
    top = tower.length if max_length is None else min(max_length, tower.length)
    for l in range(2, top + 1):
        for lam in tower.weights(l):
            comp_rank, coherent = coproduct_rank_test(tower, lam)
            rep.record("Sym^2 multiplication injective", comp_rank == coherent,
                       {"weight": list(lam), "rank": comp_rank, "coherent": coherent})
    gens = tower.gens
    non_omega = gens.size - (gens.omega is not None)
    if non_omega <= 1:
        rep.record("B_0 = k", tower.dim_b0(top) == 1, {"dim_b0": tower.dim_b0(top), "length": top})
    elif witness:
        f, order = graph_generator(K44_EDGES)
        ok, info = graph_witness_properties(f)
        rep.record("K44 witness in (S^8_0)^Gamma", ok, info)
    return rep


def graph_witness_properties(f: RatFun) -> tuple[bool, dict]:
    """Nonzero, killed by Delta and Delta*(4,..,4), and all degree-zero splits vanish."""
    l = f.nvars
    info = {
        "nonzero": not f.is_zero(),
        "translation": f.apply_delta().is_zero(),
        "regular": f.apply_delta_star([4] * l).is_zero(),
    }
    info["indecomposable"] = all(f.component(list(I), list(J), 0).is_zero() for I, J in two_block_partitions(l))
    return all(info.values()), info


SUITES = ("unit_translation", "commutator", "virasoro", "griess")


def run_suites(T: VertexTruncation, names: Sequence[str] = ("all",), ranges: Ranges | None = None,
               b0_length: int | None = None) -> list[CheckReport]:
    names = list(SUITES) + ["b0_polynomiality"] if "all" in names else list(names)
    out = []
    for name in names:
        if name == "unit_translation":
            out.append(check_unit_translation(T, ranges))
        elif name == "commutator":
            out.append(check_commutator(T, ranges))
        elif name == "virasoro":
            if T.gens.omega is not None:
                out.append(check_virasoro(T, ranges))
        elif name == "griess":
            out.append(check_griess(T))
        elif name == "b0_polynomiality":
            out.append(check_b0_polynomiality(T.tower, b0_length or T.L))
        else:
            raise ValueError("unknown suite %r" % name)
    return out


__all__ = [
    "CheckReport", "Ranges", "check_unit_translation", "check_commutator", "check_virasoro",
    "check_griess", "check_b0_polynomiality", "recover_griess", "run_suites", "SUITES", "TowerError",
]
