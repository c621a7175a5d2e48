"""Constructive reduction steps between the deviation properties.

These are the operations the equivalence arguments actually perform: splitting
an overlapping constraint pair into three disjoint-or-equal terms, averaging
over random equitable bipartitions, rebuilding an unrestricted count from a
disjoint-tuple counter, bounding filtration differences by the bipartite edge
discrepancy, boosting a subset discrepancy into two disjoint quarter-size sets
with an edge-count gap, and turning constrained-count deviations into a bound
on the spread of degree powers.  Everything randomised takes an explicit seed
and derives per-trial substreams, so runs replay exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .graphs import Graph, VertexSet, edges_within
from .homomorphisms import (
    ConstraintTuple,
    Pattern,
    extension_counts,
    filtration_values,
    hom_count,
)
from .metrics import (
    EXACT_SUBSET_CAP,
    SamplerSpec,
    edge_discrepancy_exact,
    edge_discrepancy_search,
)

EXACT_BIPARTITION_CAP = 12


@dataclass(frozen=True)
class OverlapSplit:
    """Three-term split of positions (i, j): c(parts[0]) + c(parts[1]) + c(parts[2])
    equals the count of the original tuple."""

    i: int
    j: int
    parts: tuple[ConstraintTuple, ConstraintTuple, ConstraintTuple]


def _position_sets(
    c: ConstraintTuple, g: Graph, i: int, j: int
) -> tuple[VertexSet, VertexSet]:
    full = VertexSet.from_mask(g.full_mask)
    a = c[i] if c[i] is not None else full
    b = c[j] if c[j] is not None else full
    g.check_set(a)
    g.check_set(b)
    return a, b


def overlap_split(c: ConstraintTuple, g: Graph, i: int, j: int) -> OverlapSplit:
    """Split (U_i, U_j) into (U_i minus U_j, U_j), (both, U_j minus U_i), (both, both)."""
    if i == j:
        raise ValueError("positions must differ")
    if not (0 <= i < len(c) and 0 <= j < len(c)):
        raise ValueError(f"positions ({i}, {j}) out of range for tuple of length {len(c)}")
    a, b = _position_sets(c, g, i, j)
    inter = VertexSet.from_mask(a.mask & b.mask)
    a_only = VertexSet.from_mask(a.mask & ~b.mask)
    b_only = VertexSet.from_mask(b.mask & ~a.mask)
    parts = (
        c.with_set(i, a_only).with_set(j, b),
        c.with_set(i, inter).with_set(j, b_only),
        c.with_set(i, inter).with_set(j, inter),
    )
    return OverlapSplit(i=i, j=j, parts=parts)


def diagonal_count(h: Pattern, g: Graph, c: ConstraintTuple, i: int, j: int) -> int:
    """Homomorphisms with equal images at positions i and j (inside U_i & U_j).

    Zero when ij is a pattern edge (loops are impossible); otherwise the count
    of the pattern with j merged into i, constrained to the intersection.
    """
    merged = h.merge_vertices(i, j)
    if merged is None:
        return 0
    a, b = _position_sets(c, g, i, j)
    inter = VertexSet.from_mask(a.mask & b.mask)
    pattern, kept = merged
    sets = []
    for old in kept:
        if old == i:
            sets.append(inter)
        else:
            sets.append(c[old])
    return hom_count(pattern, g, ConstraintTuple(sets))


def offdiagonal_count(h: Pattern, g: Graph, c: ConstraintTuple, i: int, j: int) -> int:
    """Homomorphisms whose images at positions i and j differ."""
    return hom_count(h, g, c) - diagonal_count(h, g, c, i, j)


def _pair_probability(padded_size: int) -> float:
    """P[x lands in the first half, y in the second] for fixed x != y."""
    return padded_size / (4.0 * (padded_size - 1))


def _equitable_halves(
    members: list[int], rng: np.random.Generator
) -> tuple[VertexSet, VertexSet]:
    """Random equitable bipartition; odd sets are padded with a dummy that is
    dropped from whichever half receives it."""
    padded = list(members)
    if len(padded) % 2 == 1:
        padded.append(-1)
    perm = rng.permutation(len(padded))
    half = len(padded) // 2
    first = [padded[k] for k in perm[:half] if padded[k] >= 0]
    second = [padded[k] for k in perm[half:] if padded[k] >= 0]
    return VertexSet(first), VertexSet(second)


def equitable_bipartition_expectation(
    h: Pattern,
    g: Graph,
    c: ConstraintTuple,
    i: int,
    j: int,
    trials: int = 200,
    seed: int = 0,
) -> tuple[float, Optional[float]]:
    """Average count when U (at both i and j) is split into random equal halves.

    Returns the Monte-Carlo mean and, for |U| <= 12, the exact expectation by
    enumerating all equitable bipartitions; that exact value equals
    s/(4(s-1)) times the off-diagonal count, where s is the padded even size.
    """
    if i == j:
        raise ValueError("positions must differ")
    if c[i] is None or c[j] is None or c[i] != c[j]:
        raise ValueError("positions i and j must carry the same explicit set")
    u = c[i]
    g.check_set(u)
    if u.size < 2:
        raise ValueError(f"need |U| >= 2 to bipartition, got {u.size}")
    if trials < 1:
        raise ValueError("trials must be positive")
    members = list(u.members)

    def count_for(a: VertexSet, b: VertexSet) -> int:
        return hom_count(h, g, c.with_set(i, a).with_set(j, b))

    total = 0.0
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        a, b = _equitable_halves(members, rng)
        total += count_for(a, b)
    mc_mean = total / trials

    exact: Optional[float] = None
    if u.size <= EXACT_BIPARTITION_CAP:
        import itertools

        padded = list(members)
        if len(padded) % 2 == 1:
            padded.append(-1)
        half = len(padded) // 2
        acc = 0
        count = 0
        for chosen in itertools.combinations(padded, half):
            chosen_set = set(chosen)
            a = VertexSet(x for x in chosen if x >= 0)
            b = VertexSet(x for x in padded if x not in chosen_set and x >= 0)
            acc += count_for(a, b)
            count += 1
        exact = acc / count
    return mc_mean, exact


def disjointify_estimate(
    h: Pattern,
    g: Graph,
    c: ConstraintTuple,
    oracle: Callable[[Pattern, Graph, ConstraintTuple], float],
    trials: int = 200,
    seed: int = 0,
) -> tuple[float, int]:
    """Estimate hom_count(h, g, c) using only counts of pairwise-disjoint tuples.

    Pairs are resolved in lexicographic order.  An overlapping pair is split
    into the three overlap terms; the equal-sets term is rebuilt from one
    random equitable bipartition (rescaled by the exact pair probability) plus
    the exact-by-recursion diagonal term, so the only error is Monte-Carlo
    noise.  The oracle is invoked exactly on tuples with no overlapping pair
    left.  Returns the mean over `trials` independent replicates and the
    number of distinct top-level pairs that needed resolving.
    """
    if len(c) != h.r:
        raise ValueError(f"constraint tuple has {len(c)} sets, pattern needs {h.r}")
    if trials < 1:
        raise ValueError("trials must be positive")
    full = VertexSet.from_mask(g.full_mask)

    def concrete(t: ConstraintTuple) -> ConstraintTuple:
        return ConstraintTuple([s if s is not None else full for s in t.sets])

    def resolve(
        pattern: Pattern,
        t: ConstraintTuple,
        pair_idx: int,
        rng: np.random.Generator,
        top: bool,
        resolved: set[int],
    ) -> float:
        sets = t.sets
        if any(s.size == 0 for s in sets):
            return 0.0
        pairs = [
            (a, b) for a in range(pattern.r) for b in range(a + 1, pattern.r)
        ]
        k = pair_idx
        while k < len(pairs):
            i, j = pairs[k]
            if sets[i].mask & sets[j].mask:
                break
            k += 1
        else:
            return float(oracle(pattern, g, t))
        if top:
            resolved.add(k)
        i, j = pairs[k]
        split = overlap_split(t, g, i, j)
        value = 0.0
        for part in split.parts[:2]:
            value += resolve(pattern, part, k + 1, rng, top, resolved)
        both = split.parts[2]
        w = both[i]
        # diagonal term: images equal at i and j, exact via the merged pattern
        merged = pattern.merge_vertices(i, j)
        if merged is not None:
            m_pattern, kept = merged
            m_sets = [w if old == i else both[old] for old in kept]
            value += resolve(
                m_pattern, ConstraintTuple(m_sets), 0, rng, False, resolved
            )
        if w.size >= 2:
            members = list(w.members)
            a, b = _equitable_halves(members, rng)
            padded = len(members) + (len(members) % 2)
            q = _pair_probability(padded)
            sample = resolve(
                pattern,
                both.with_set(i, a).with_set(j, b),
                k + 1,
                rng,
                top,
                resolved,
            )
            value += sample / q
        return value

    total = 0.0
    steps = 0
    base = concrete(c)
    for rep in range(trials):
        rng = np.random.default_rng([seed, rep])
        resolved: set[int] = set()
        total += resolve(h, base, 0, rng, True, resolved)
        steps = max(steps, len(resolved))
    return total / trials, steps


@dataclass
class CountingLemmaResult:
    """Filtration differences checked against 4 * delta * n^v."""

    diffs: list[float]
    added_edges: list[tuple[int, int]]
    step_ok: list[bool]
    bound_holds: bool
    delta_used: float
    delta_method: str
    bound: float

    def to_json_dict(self) -> dict:
        return {
            "diffs": self.diffs,
            "added_edges": [list(e) for e in self.added_edges],
            "step_ok": self.step_ok,
            "bound_holds": self.bound_holds,
            "delta_used": self.delta_used,
            "delta_method": self.delta_method,
            "bound": self.bound,
        }


def bipartite_edge_deviation(
    g: Graph, p: float, spec: Optional[SamplerSpec] = None
) -> tuple[float, str]:
    """The subset deviation in its two-sided count convention: max over U of
    |2 e(U) - p |U|^2| / n^2 (twice the unordered discrepancy); exact under the
    enumeration cap, otherwise a witnessed search lower bound flagged heuristic."""
    if g.n <= EXACT_SUBSET_CAP:
        return 2.0 * edge_discrepancy_exact(g, p).deviation, "exact"
    rep = edge_discrepancy_search(g, p, spec or SamplerSpec(trials=16))
    return 2.0 * rep.deviation, "heuristic"


def counting_lemma_bound(
    h: Pattern,
    g: Graph,
    p: float,
    c: Optional[ConstraintTuple] = None,
    order: Optional[Sequence[tuple[int, int]]] = None,
    delta: Optional[float] = None,
    delta_method: str = "provided",
    spec: Optional[SamplerSpec] = None,
) -> CountingLemmaResult:
    """Check every filtration difference against 4 * delta * n^v.

    delta defaults to the measured bipartite edge deviation of the host; a
    caller may pass a precomputed value (delta_method labels it).
    """
    if delta is None:
        delta, delta_method = bipartite_edge_deviation(g, p, spec)
    steps = filtration_values(h, g, p, c, order)
    diffs = [
        steps[k].value - steps[k - 1].value for k in range(1, len(steps))
    ]
    bound = 4.0 * delta * float(g.n) ** h.r
    tol = 1e-9 * float(g.n) ** h.r
    step_ok = [abs(d) <= bound + tol for d in diffs]
    return CountingLemmaResult(
        diffs=diffs,
        added_edges=[s.added_edge for s in steps[1:]],
        step_ok=step_ok,
        bound_holds=all(step_ok),
        delta_used=delta,
        delta_method=delta_method,
        bound=bound,
    )


def half_set_discrepancy(g: Graph, q: float, s: VertexSet) -> float:
    """|e(S) - q C(|S|, 2)|, the quantity the half-set search maximises."""
    g.check_set(s)
    k = s.size
    return abs(edges_within(g, s) - q * (k * (k - 1) // 2))


def _climb_half_set(g: Graph, q: float, ind: np.ndarray) -> tuple[float, np.ndarray]:
    """Swap (one in, one out) hill climbing at fixed |S| = popcount(ind)."""
    a = g.bool_matrix().astype(np.float64)
    ind = ind.astype(np.float64)
    deg_in = a @ ind
    e = float(ind @ deg_in) / 2.0
    k = int(ind.sum())
    target = q * (k * (k - 1) / 2.0)
    current = abs(e - target)
    inside = ind.astype(bool)
    while True:
        ins = np.nonzero(inside)[0]
        outs = np.nonzero(~inside)[0]
        if len(ins) == 0 or len(outs) == 0:
            return current, inside
        # delta_e for swapping u (in) with w (out): deg_in[w] - deg_in[u] - A[u, w]
        delta = deg_in[outs][None, :] - deg_in[ins][:, None] - a[np.ix_(ins, outs)]
        vals = np.abs(e + delta - target)
        flat = int(np.argmax(vals))
        best = vals.flat[flat]
        if best <= current + 1e-12:
            return current, inside
        u = ins[flat // len(outs)]
        w = outs[flat % len(outs)]
        inside[u] = False
        inside[w] = True
        e += deg_in[w] - deg_in[u] - a[u, w]
        deg_in += a[:, w] - a[:, u]
        current = float(best)


def _resize_to(
    members: set[int], pool: Sequence[int], size: int, rng: np.random.Generator
) -> set[int]:
    """Trim uniformly or pad from the pool until |members| == size."""
    out = set(members)
    if len(out) > size:
        drop = rng.choice(sorted(out), size=len(out) - size, replace=False)
        out -= {int(x) for x in drop}
    elif len(out) < size:
        candidates = [x for x in pool if x not in out]
        need = size - len(out)
        if need > len(candidates):
            raise ValueError("not enough vertices to pad to the requested size")
        add = rng.choice(candidates, size=need, replace=False)
        out |= {int(x) for x in add}
    return out


def discrepancy_half_set(
    g: Graph,
    q: float,
    s: VertexSet,
    restarts: int = 16,
    seed: int = 0,
) -> tuple[VertexSet, float]:
    """Search for a half-size set with large |e(S') - q C(|S'|, 2)|.

    Candidates are S itself resized to floor(n/2) plus random half-sets; each
    is improved by swap hill climbing (size never changes).
    """
    g.check_set(s)
    n = g.n
    if n < 2:
        raise ValueError(f"need at least 2 vertices, got n={n}")
    if restarts < 1:
        raise ValueError("restarts must be positive")
    half = n // 2
    best_val = -1.0
    best: Optional[np.ndarray] = None
    for t in range(restarts):
        rng = np.random.default_rng([seed, t])
        if t == 0:
            start_members = _resize_to(set(s.members), range(n), half, rng)
        else:
            start_members = {int(x) for x in rng.choice(n, size=half, replace=False)}
        ind = np.zeros(n, dtype=bool)
        for v in start_members:
            ind[v] = True
        val, out = _climb_half_set(g, q, ind)
        if val > best_val:
            best_val, best = val, out
    found = VertexSet(int(v) for v in np.nonzero(best)[0])
    return found, best_val


@dataclass
class AmplificationResult:
    """Two disjoint quarter-size sets with an edge-count gap, plus provenance."""

    s_half: VertexSet
    x: VertexSet
    y: VertexSet
    gap: float
    retries: int
    certified: bool
    d_value: float
    threshold: float
    slack: float
    seed: int
    q: float

    def to_json_dict(self) -> dict:
        return {
            "s_half": list(self.s_half.members),
            "x": list(self.x.members),
            "y": list(self.y.members),
            "gap": self.gap,
            "retries": self.retries,
            "certified": self.certified,
            "d_value": self.d_value,
            "threshold": self.threshold,
            "slack": self.slack,
            "seed": self.seed,
            "q": self.q,
        }


def amplify_discrepancy(
    g: Graph,
    q: float,
    s: VertexSet,
    slack: float = 0.02,
    max_retries: int = 10,
    seed: int = 0,
    half_restarts: int = 8,
) -> AmplificationResult:
    """Turn a discrepancy witness into two disjoint floor(n/4)-sets with a gap.

    First improves S to a half-size set S'; then draws X as the trace of a
    fair random vertex subset on S' and Y as a fair subset of the complement
    of that draw (marginal 1/4 each), resizing both to exactly floor(n/4).  A
    component whose raw size strays beyond slack*n is redrawn, leaving the
    other in place; a gap below D/16 - slack*n^2 redraws both.  After
    max_retries redraw rounds the best attempt is returned uncertified.
    """
    g.check_set(s)
    n = g.n
    if n < 4:
        raise ValueError(f"need at least 4 vertices, got n={n}")
    d_value = half_set_discrepancy(g, q, s)
    if d_value <= 0:
        raise ValueError("input set has zero discrepancy; nothing to amplify")
    s_half, _ = discrepancy_half_set(g, q, s, restarts=half_restarts, seed=seed)
    target = n // 4
    tol = slack * n
    threshold = d_value / 16.0 - slack * n * n

    all_vertices = list(range(n))
    a_mask: Optional[np.ndarray] = None
    y_raw: Optional[set[int]] = None
    best: Optional[tuple[float, VertexSet, VertexSet, int]] = None
    retries = 0
    while True:
        if a_mask is None:
            a_mask = np.random.default_rng([seed, 2, retries]).random(n) < 0.5
            y_raw = None  # the complement pool moved
        if y_raw is None:
            draws = np.random.default_rng([seed, 3, retries]).random(n) < 0.5
            y_raw = {v for v in all_vertices if not a_mask[v] and draws[v]}
        x_raw = {v for v in s_half.members if a_mask[v]}
        x_ok = abs(len(x_raw) - target) <= tol
        y_ok = abs(len(y_raw) - target) <= tol
        if x_ok and y_ok:
            # resize to exactly floor(n/4); X pads from S' avoiding Y, Y pads
            # from outside A avoiding X, falling back to anywhere outside X
            rng = np.random.default_rng([seed, 4, retries])
            x_members = _resize_to(
                x_raw, [v for v in s_half.members if v not in y_raw], target, rng
            )
            y_pool = [v for v in all_vertices if not a_mask[v] and v not in x_members]
            if len(y_pool) < target:
                y_pool = [v for v in all_vertices if v not in x_members]
            y_members = _resize_to(
                {v for v in y_raw if v not in x_members}, y_pool, target, rng
            )
            x_set = VertexSet(x_members)
            y_set = VertexSet(y_members)
            gap = abs(edges_within(g, x_set) - edges_within(g, y_set))
            if best is None or gap > best[0]:
                best = (gap, x_set, y_set, retries)
            if gap >= threshold:
                return AmplificationResult(
                    s_half=s_half,
                    x=x_set,
                    y=y_set,
                    gap=float(gap),
                    retries=retries,
                    certified=True,
                    d_value=d_value,
                    threshold=threshold,
                    slack=slack,
                    seed=seed,
                    q=q,
                )
            a_mask = None  # gap failure: redraw everything
        elif not x_ok:
            a_mask = None
        else:
            y_raw = None
        if retries >= max_retries:
            break
        retries += 1
    if best is None:
        # never hit the size window; force one resized draw so the result is valid
        rng = np.random.default_rng([seed, 5])
        x_members = _resize_to(set(), list(s_half.members), target, rng)
        y_members = _resize_to(
            set(), [v for v in all_vertices if v not in x_members], target, rng
        )
        x_set, y_set = VertexSet(x_members), VertexSet(y_members)
        gap = abs(edges_within(g, x_set) - edges_within(g, y_set))
        best = (gap, x_set, y_set, retries)
    gap, x_set, y_set, used = best
    return AmplificationResult(
        s_half=s_half,
        x=x_set,
        y=y_set,
        gap=float(gap),
        retries=used,
        certified=False,
        d_value=d_value,
        threshold=threshold,
        slack=slack,
        seed=seed,
        q=q,
    )


def power_sum_gap(
    a: Sequence[int], b: Sequence[int], r: int
) -> tuple[int, int]:
    """Exact (lhs, rhs) of: sum_{i,j} |b_j^r - a_i^r| >= (sum b^(r-1)) (sum b - sum a).

    Inputs must be non-negative integers of equal length; arithmetic is exact.
    """
    if r < 1:
        raise ValueError(f"power r must be at least 1, got {r}")
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    for seq, name in ((a, "a"), (b, "b")):
        for x in seq:
            if not isinstance(x, (int, np.integer)) or isinstance(x, bool) or x < 0:
                raise ValueError(f"{name} must contain non-negative integers, got {x!r}")
    lhs = sum(abs(int(bj) ** r - int(ai) ** r) for ai in a for bj in b)
    rhs = sum(int(bj) ** (r - 1) for bj in b) * (
        sum(int(bj) for bj in b) - sum(int(ai) for ai in a)
    )
    return lhs, rhs


def degree_power_discrepancy(g: Graph, r: int) -> int:
    """Sum over ordered vertex pairs of |d(u)^r - d(v)^r| (exact)."""
    if r < 0:
        raise ValueError(f"power r must be non-negative, got {r}")
    xs = sorted(d**r for d in g.degree_sequence())
    total = 0
    prefix = 0
    for idx, x in enumerate(xs):
        total += idx * x - prefix
        prefix += x
    return 2 * total


@dataclass
class MainLemmaTrace:
    """Per-vertex signed deviations of doubled counts, and the derived bound.

    For each u the host splits into the vertices where the doubled count
    c(u, v) exceeds its reference p^e d(u)^r n^(v-r-1) and the rest;
    sigma_plus[u] / sigma_minus[u] are the two signed deviation sums, obtained
    from constrained counts.  total is the spread of r-th degree powers, and
    bound_ratio compares it with p^(-e) * delta * n^(r+2) (the proof's
    normalisation; the stated-form ratio with p^(+e) is recorded alongside).
    """

    r: int
    total: int
    sigma_plus: list[float]
    sigma_minus: list[float]
    bound_ratio: float
    delta: float
    p: float
    n: int
    pattern_vertices: int
    pattern_edges: int
    sigma_ok: list[bool]
    bound_ratio_stated: float
    rhs_from_sigmas: float
    proof_tuples: list[ConstraintTuple] = dataclass_field(default_factory=list)

    def max_sigma_deviation(self) -> float:
        """Largest per-u |sigma| divided by n^v; the sign-split tuples realise
        this deviation, so any family containing them measures at least it."""
        norm = float(self.n) ** self.pattern_vertices
        return max(
            max(abs(sp), abs(sm)) for sp, sm in zip(self.sigma_plus, self.sigma_minus)
        ) / norm

    def with_delta(self, delta: float) -> "MainLemmaTrace":
        """Re-score against a delta measured after the trace (the sigmas and
        the degree-power total do not depend on it)."""
        if delta < 0:
            raise ValueError("delta must be non-negative")
        ratio, ratio_stated = _trace_ratios(
            self.total, self.p, self.pattern_edges, delta, self.n, self.r
        )
        norm = float(self.n) ** self.pattern_vertices
        ok = [
            max(abs(sp), abs(sm)) <= delta * norm + 1e-9 * norm
            for sp, sm in zip(self.sigma_plus, self.sigma_minus)
        ]
        return replace(
            self,
            delta=delta,
            bound_ratio=ratio,
            bound_ratio_stated=ratio_stated,
            sigma_ok=ok,
        )

    def to_json_dict(self) -> dict:
        return {
            "r": self.r,
            "total": self.total,
            "sigma_plus": self.sigma_plus,
            "sigma_minus": self.sigma_minus,
            "bound_ratio": self.bound_ratio,
            "bound_ratio_stated": self.bound_ratio_stated,
            "delta": self.delta,
            "p": self.p,
            "n": self.n,
            "pattern_vertices": self.pattern_vertices,
            "pattern_edges": self.pattern_edges,
            "sigma_ok": self.sigma_ok,
            "rhs_from_sigmas": self.rhs_from_sigmas,
        }


def _trace_ratios(
    total: int, p: float, e: int, delta: float, n: int, r: int
) -> tuple[float, float]:
    denom_proof = p ** (-e) * delta * float(n) ** (r + 2)
    denom_stated = p**e * delta * float(n) ** (r + 2)
    if total == 0:
        return 0.0, 0.0
    ratio = total / denom_proof if denom_proof > 0 else math.inf
    stated = total / denom_stated if denom_stated > 0 else math.inf
    return ratio, stated


def main_lemma_trace(
    h: Pattern, g: Graph, p: float, delta_measured: float
) -> MainLemmaTrace:
    """Trace the degree-power argument on a concrete host.

    Requires p > 0.  The designated vertex of h has degree r; for every u the
    host is split by the sign of c(u, v) - p^e d(u)^r n^(v-r-1) and the two
    signed sums are evaluated through constrained counts with the sign classes
    at the designated position and N(u) at its neighbours.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p={p} outside (0, 1]")
    if delta_measured < 0:
        raise ValueError("delta must be non-negative")
    n = g.n
    if n == 0:
        raise ValueError("host graph is empty")
    v = h.r
    e = h.edge_count
    d = h.designated
    r = h.degree(d)
    nbrs = set(h.neighbors(d))
    ideal = p**e
    sigma_plus: list[float] = []
    sigma_minus: list[float] = []
    sigma_ok: list[bool] = []
    proof_tuples: list[ConstraintTuple] = []
    norm = float(n) ** v
    for u in range(n):
        counts = extension_counts(h, g, u)
        tau = ideal * float(g.degree(u)) ** r * float(n) ** (v - r - 1)
        plus_mask = 0
        for vtx in range(n):
            if counts[vtx] >= tau:
                plus_mask |= 1 << vtx
        v_plus = VertexSet.from_mask(plus_mask)
        v_minus = VertexSet.from_mask(g.full_mask & ~plus_mask)
        nu = VertexSet.from_mask(g.adj[u])

        def side_tuple(side: VertexSet) -> ConstraintTuple:
            sets = []
            for w in range(v):
                if w == d:
                    sets.append(side)
                elif w in nbrs:
                    sets.append(nu)
                else:
                    sets.append(None)
            return ConstraintTuple(sets)

        t_plus, t_minus = side_tuple(v_plus), side_tuple(v_minus)
        proof_tuples.extend((t_plus, t_minus))
        sp = hom_count(h, g, t_plus) - tau * v_plus.size
        sm = hom_count(h, g, t_minus) - tau * v_minus.size
        sigma_plus.append(float(sp))
        sigma_minus.append(float(sm))
        sigma_ok.append(
            max(abs(sp), abs(sm)) <= delta_measured * norm + 1e-9 * norm
        )
    total = degree_power_discrepancy(g, r)
    rhs = (
        2.0
        * p ** (-e)
        * float(n) ** (-v + r + 1)
        * sum(sp - sm for sp, sm in zip(sigma_plus, sigma_minus))
    )
    ratio_proof, ratio_stated = _trace_ratios(total, p, e, delta_measured, n, r)
    return MainLemmaTrace(
        r=r,
        total=total,
        sigma_plus=sigma_plus,
        sigma_minus=sigma_minus,
        bound_ratio=ratio_proof,
        delta=delta_measured,
        p=p,
        n=n,
        pattern_edges=e,
        sigma_ok=sigma_ok,
        bound_ratio_stated=ratio_stated,
        rhs_from_sigmas=rhs,
        pattern_vertices=v,
        proof_tuples=proof_tuples,
    )
