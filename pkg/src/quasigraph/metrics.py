"""Quasirandomness deviation evaluators.

Each evaluator measures how far a host graph sits from the ideal reference
density p under one property family (edge discrepancy over subsets, one-sided
C4 excess, top of the spectrum, induced-subset counts, constrained-tuple
counts) and returns a DeviationReport carrying the deviation on the common
n^v normalisation, the witnessing subset(s), and how the number was obtained
(exact enumeration, sampling, or heuristic search).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .graphs import Graph, VertexSet, edge_density, edges_within, _bits
from .homomorphisms import (
    ConstraintTuple,
    Pattern,
    hom_count,
    hom_count_in_induced,
    preset,
)

EXACT_SUBSET_CAP = 24
EXACT_HEREDITARY_CAP = 16
SUBSET_LAWS = ("size_stratified", "uniform")


@dataclass(frozen=True)
class SamplerSpec:
    """How to draw random vertex subsets: trial count, law, base seed.

    size_stratified draws |U| uniformly from {0, ..., n} first, then a uniform
    subset of that size; uniform takes each vertex independently with
    probability 1/2.  Trial t uses a substream derived from (seed, t), so
    enlarging trials only appends trials (reported maxima never decrease).
    """

    trials: int = 1000
    subset_law: str = "size_stratified"
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be positive, got {self.trials}")
        if self.subset_law not in SUBSET_LAWS:
            raise ValueError(
                f"unknown subset_law {self.subset_law!r}; expected one of {SUBSET_LAWS}"
            )

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "subset_law": self.subset_law,
            "seed": self.seed,
        }


def sample_subset(n: int, law: str, rng: np.random.Generator) -> VertexSet:
    if law == "uniform":
        draws = rng.random(n) < 0.5
        return VertexSet(int(v) for v in np.nonzero(draws)[0])
    size = int(rng.integers(0, n + 1))
    members = rng.choice(n, size=size, replace=False) if size else []
    return VertexSet(int(v) for v in members)


def _trial_rng(spec: SamplerSpec, trial: int) -> np.random.Generator:
    return np.random.default_rng([spec.seed, trial])


@dataclass
class DeviationReport:
    """Outcome of one deviation evaluator."""

    property: str
    p_ref: float
    q_obs: float
    deviation: float
    witness: tuple[VertexSet, ...]
    method: str
    trials: int
    seed: Optional[int] = None
    raw: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        if not self.witness:
            witness = None
        elif len(self.witness) == 1:
            witness = list(self.witness[0].members)
        else:
            witness = [list(s.members) for s in self.witness]
        out = {
            "property": self.property,
            "p_ref": self.p_ref,
            "q_obs": self.q_obs,
            "deviation": self.deviation,
            "witness": witness,
            "method": self.method,
            "trials": self.trials,
            "seed": self.seed,
        }
        if self.raw is not None:
            out["raw"] = self.raw
        out.update(self.extra)
        return out


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")


def _subset_objective_block(n_low: int) -> np.ndarray:
    """Bit matrix (2^k, k): row m has the bits of m, for vectorised block sums."""
    masks = np.arange(1 << n_low, dtype=np.uint32)
    return ((masks[:, None] >> np.arange(n_low)) & 1).astype(np.float64)


def edge_discrepancy_exact(
    g: Graph, p: float, exact_cap: int = EXACT_SUBSET_CAP
) -> DeviationReport:
    """Exact max over all 2^n subsets of |e(U) - p|U|^2/2| / n^2.

    Enumerates blockwise: low-vertex subsets are scored as one vectorised
    batch per high-vertex subset, with edge counts maintained incrementally,
    so the full 2^n sweep stays near memory speed.  Refuses n above exact_cap.
    """
    _check_p(p)
    n = g.n
    if n > exact_cap:
        raise ValueError(
            f"n={n} exceeds the exact enumeration cap {exact_cap}; "
            "use edge_discrepancy_search instead"
        )
    if n == 0:
        raise ValueError("edge discrepancy undefined for the empty graph")
    k = min(n, 14)
    n_hi = n - k
    bits_matrix = _subset_objective_block(k)
    size_lo = bits_matrix.sum(axis=1)
    # e_lo[m]: edges inside the low block's subset m
    low_rows = [g.adj[v] & ((1 << k) - 1) for v in range(k)]
    e_lo = np.zeros(1 << k, dtype=np.float64)
    for m in range(1, 1 << k):
        low = m & -m
        v = low.bit_length() - 1
        rest = m ^ low
        e_lo[m] = e_lo[rest] + bin(low_rows[v] & rest).count("1")
    # adjacency of each high vertex restricted to low vertices, as float rows
    hi_vertices = list(range(k, n))
    hi_low_rows = np.array(
        [[(g.adj[x] >> v) & 1 for v in range(k)] for x in hi_vertices],
        dtype=np.float64,
    ).reshape(n_hi, k)

    best_val = -1.0
    best_mask = 0
    cnt = np.zeros(k, dtype=np.float64)  # neighbours in current high subset, per low vertex
    e_hi = 0
    size_hi = 0
    hi_mask = 0
    gray_prev = 0
    for step in range(1 << n_hi):
        if step > 0:
            gray = step ^ (step >> 1)
            flip = gray ^ gray_prev
            gray_prev = gray
            j = flip.bit_length() - 1
            x = hi_vertices[j]
            if gray & flip:  # x enters
                e_hi += bin(g.adj[x] & hi_mask).count("1")
                hi_mask |= 1 << x
                size_hi += 1
                cnt += hi_low_rows[j]
            else:  # x leaves
                hi_mask ^= 1 << x
                e_hi -= bin(g.adj[x] & hi_mask).count("1")
                size_hi -= 1
                cnt -= hi_low_rows[j]
        cross = bits_matrix @ cnt
        sizes = size_hi + size_lo
        vals = np.abs(e_hi + e_lo + cross - 0.5 * p * sizes * sizes)
        m = int(np.argmax(vals))
        if vals[m] > best_val:
            best_val = float(vals[m])
            best_mask = hi_mask | m
    witness = VertexSet.from_mask(best_mask)
    return DeviationReport(
        property="edge_discrepancy",
        p_ref=p,
        q_obs=edge_density(g) if n >= 2 else 0.0,
        deviation=best_val / (n * n),
        witness=(witness,),
        method="exact",
        trials=1 << n,
        raw=best_val,
    )


def _discrepancy_value(e: float, size: int, p: float) -> float:
    return abs(e - 0.5 * p * size * size)


def _climb_subset(g: Graph, p: float, ind: np.ndarray) -> tuple[float, np.ndarray]:
    """Single-vertex-toggle hill climb on |e(U) - p|U|^2/2| from a start subset."""
    a = g.bool_matrix().astype(np.float64)
    ind = ind.astype(np.float64)
    deg_in = a @ ind
    e = float(ind @ deg_in) / 2.0
    size = int(ind.sum())
    current = _discrepancy_value(e, size, p)
    while True:
        sign = 1.0 - 2.0 * ind  # +1 for joins, -1 for leaves
        new_e = e + sign * deg_in
        new_size = size + sign
        vals = np.abs(new_e - 0.5 * p * new_size * new_size)
        v = int(np.argmax(vals))
        if vals[v] <= current + 1e-12:
            return current, ind.astype(bool)
        if ind[v]:
            ind[v] = 0.0
            size -= 1
            e -= deg_in[v]
            deg_in -= a[:, v]
        else:
            ind[v] = 1.0
            size += 1
            e += deg_in[v]
            deg_in += a[:, v]
        current = float(vals[v])


def edge_discrepancy_search(g: Graph, p: float, spec: SamplerSpec) -> DeviationReport:
    """Witnessed lower bound on the edge discrepancy by restarted hill climbing."""
    _check_p(p)
    n = g.n
    if n == 0:
        raise ValueError("edge discrepancy undefined for the empty graph")
    best_val = -1.0
    best: Optional[np.ndarray] = None
    for t in range(spec.trials):
        rng = _trial_rng(spec, t)
        start = np.zeros(n, dtype=bool)
        for v in sample_subset(n, spec.subset_law, rng):
            start[v] = True
        val, ind = _climb_subset(g, p, start)
        if val > best_val:
            best_val, best = val, ind
    witness = VertexSet(int(v) for v in np.nonzero(best)[0])
    return DeviationReport(
        property="edge_discrepancy",
        p_ref=p,
        q_obs=edge_density(g) if n >= 2 else 0.0,
        deviation=best_val / (n * n),
        witness=(witness,),
        method="heuristic",
        trials=spec.trials,
        seed=spec.seed,
        raw=best_val,
    )


def edge_discrepancy(g: Graph, p: float, spec: Optional[SamplerSpec] = None) -> DeviationReport:
    """Exact when the subset enumeration fits; otherwise the search heuristic."""
    if g.n <= EXACT_SUBSET_CAP:
        return edge_discrepancy_exact(g, p)
    return edge_discrepancy_search(g, p, spec or SamplerSpec())


def c4_homomorphisms_spectral(g: Graph) -> float:
    eig = np.linalg.eigvalsh(g.bool_matrix().astype(np.float64))
    return float((eig**4).sum())


C4_CROSSCHECK_CAP = 96


def c4_deviation(g: Graph, p: float) -> DeviationReport:
    """One-sided C4 surplus max(0, (hom(C4) - p^4 n^4) / n^4), spectral route.

    The spectral count (sum of fourth powers of eigenvalues) is cross-checked
    against the backtracking counter when the host is small enough for that to
    be cheap; a disagreement raises rather than picking a side.
    """
    _check_p(p)
    n = g.n
    if n == 0:
        raise ValueError("C4 deviation undefined for the empty graph")
    hom_spectral = c4_homomorphisms_spectral(g)
    extra = {"engines": ["spectral"]}
    if n <= C4_CROSSCHECK_CAP:
        hom_exact = hom_count(preset("C4"), g)
        scale = max(hom_exact, 1.0)
        if abs(hom_spectral - hom_exact) > 1e-6 * scale:
            raise RuntimeError(
                f"C4 engines disagree: spectral {hom_spectral} vs count {hom_exact}"
            )
        extra = {"engines": ["spectral", "count"], "hom_count": hom_exact}
    raw = hom_spectral - p**4 * n**4
    return DeviationReport(
        property="c4",
        p_ref=p,
        q_obs=edge_density(g) if n >= 2 else 0.0,
        deviation=max(0.0, raw / n**4),
        witness=(),
        method="exact",
        trials=1,
        raw=raw,
        extra=extra,
    )


def spectral_top2(g: Graph) -> tuple[float, float]:
    """The two adjacency eigenvalues of largest absolute value (signed)."""
    if g.n < 2:
        raise ValueError(f"need at least 2 vertices, got n={g.n}")
    eig = np.linalg.eigvalsh(g.bool_matrix().astype(np.float64))
    order = sorted(range(g.n), key=lambda i: (-abs(eig[i]), -eig[i]))
    return float(eig[order[0]]), float(eig[order[1]])


def spectral_report(g: Graph, p: float) -> DeviationReport:
    """Spectral deviation max(|l1 - p n|, |l2|) / n."""
    _check_p(p)
    l1, l2 = spectral_top2(g)
    dev = max(abs(l1 - p * g.n), abs(l2)) / g.n
    return DeviationReport(
        property="spectral",
        p_ref=p,
        q_obs=edge_density(g),
        deviation=dev,
        witness=(),
        method="exact",
        trials=1,
        extra={"lambda1": l1, "lambda2": l2},
    )


def _require_edges(h: Pattern) -> None:
    if h.edge_count == 0:
        raise ValueError("pattern has no edges; deviations would be vacuous")


def hereditary_deviation(
    h: Pattern, g: Graph, p: float, spec: SamplerSpec
) -> DeviationReport:
    """Max over subsets U of |hom(h, G[U]) - p^e |U|^v| / n^v.

    Exhaustive over all subsets only for n <= 16; otherwise subsets are drawn
    under ``spec.subset_law``.
    """
    _check_p(p)
    _require_edges(h)
    n = g.n
    if n == 0:
        raise ValueError("host graph is empty")
    norm = float(n) ** h.r
    ideal = p**h.edge_count

    def dev_of(s: VertexSet) -> float:
        return abs(hom_count_in_induced(h, g, s) - ideal * float(s.size) ** h.r) / norm

    if n <= EXACT_HEREDITARY_CAP:
        best, best_mask = -1.0, 0
        for mask in range(1 << n):
            d = dev_of(VertexSet.from_mask(mask))
            if d > best:
                best, best_mask = d, mask
        return DeviationReport(
            property="hereditary",
            p_ref=p,
            q_obs=edge_density(g) if n >= 2 else 0.0,
            deviation=best,
            witness=(VertexSet.from_mask(best_mask),),
            method="exact",
            trials=1 << n,
        )
    best, best_set = -1.0, VertexSet([])
    for t in range(spec.trials):
        s = sample_subset(n, spec.subset_law, _trial_rng(spec, t))
        d = dev_of(s)
        if d > best:
            best, best_set = d, s
    return DeviationReport(
        property="hereditary",
        p_ref=p,
        q_obs=edge_density(g),
        deviation=best,
        witness=(best_set,),
        method="sampled",
        trials=spec.trials,
        seed=spec.seed,
    )


def tuple_deviation(h: Pattern, g: Graph, p: float, c: ConstraintTuple) -> float:
    """|hom(h, G; C) - p^e prod |U_i|| / n^v for one constraint tuple."""
    _check_p(p)
    sizes = c.sizes(g)
    ideal = p**h.edge_count * float(np.prod([float(s) for s in sizes]))
    return abs(hom_count(h, g, c) - ideal) / float(g.n) ** h.r


def labeled_deviation_over(
    h: Pattern, g: Graph, p: float, tuples: Sequence[ConstraintTuple]
) -> tuple[float, Optional[ConstraintTuple], list[float]]:
    """Max tuple deviation over an explicit family; also the per-tuple values."""
    best, best_tuple = -1.0, None
    devs = []
    for c in tuples:
        d = tuple_deviation(h, g, p, c)
        devs.append(d)
        if d > best:
            best, best_tuple = d, c
    return best, best_tuple, devs


def sample_disjoint_tuple(
    n: int, r: int, law: str, rng: np.random.Generator
) -> ConstraintTuple:
    """Disjoint tuple: a random subset, then a uniform r-colouring of it."""
    base = sample_subset(n, law, rng)
    members = list(base.members)
    colors = rng.integers(0, r, size=len(members))
    classes: list[list[int]] = [[] for _ in range(r)]
    for v, c in zip(members, colors):
        classes[int(c)].append(v)
    return ConstraintTuple([VertexSet(cls) for cls in classes])


def sample_free_tuple(
    n: int, r: int, law: str, rng: np.random.Generator
) -> ConstraintTuple:
    return ConstraintTuple([sample_subset(n, law, rng) for _ in range(r)])


def sampled_tuple_family(
    h: Pattern, g: Graph, spec: SamplerSpec, disjoint: bool
) -> list[ConstraintTuple]:
    out = []
    for t in range(spec.trials):
        rng = _trial_rng(spec, t)
        if disjoint:
            out.append(sample_disjoint_tuple(g.n, h.r, spec.subset_law, rng))
        else:
            out.append(sample_free_tuple(g.n, h.r, spec.subset_law, rng))
    return out


def labeled_deviation(
    h: Pattern, g: Graph, p: float, spec: SamplerSpec, disjoint: bool
) -> DeviationReport:
    """Sampled max deviation over constrained tuples.

    disjoint=True draws pairwise-disjoint tuples (colouring a random subset);
    disjoint=False draws each set independently.
    """
    _check_p(p)
    _require_edges(h)
    if g.n == 0:
        raise ValueError("host graph is empty")
    family = sampled_tuple_family(h, g, spec, disjoint)
    best, best_tuple, _ = labeled_deviation_over(h, g, p, family)
    witness = tuple(s if s is not None else VertexSet([]) for s in best_tuple.sets)
    return DeviationReport(
        property="labeled_disjoint" if disjoint else "labeled_free",
        p_ref=p,
        q_obs=edge_density(g) if g.n >= 2 else 0.0,
        deviation=best,
        witness=witness,
        method="sampled",
        trials=spec.trials,
        seed=spec.seed,
    )


def crude_density_bound(
    h: Pattern, g: Graph, p: float, delta: float
) -> DeviationReport:
    """Check the count sandwich (p^e - delta) n^v <= hom <= (2 e(G))^v.

    The lower side only binds when delta < p^e / 2; the upper side is the
    edge-cover injection bound.  Together they force the crude density lower
    bound at this scale.
    """
    _check_p(p)
    _require_edges(h)
    total = hom_count(h, g)
    ideal = p**h.edge_count
    upper = float(2 * g.edge_count) ** h.r
    applicable = delta < ideal / 2
    lower = (ideal - delta) * float(g.n) ** h.r
    ok = (not applicable or total >= lower) and total <= upper
    violation = 0.0
    if applicable and total < lower:
        violation = (lower - total) / float(g.n) ** h.r
    if total > upper:
        violation = max(violation, (total - upper) / float(g.n) ** h.r)
    return DeviationReport(
        property="crude_density_bound",
        p_ref=p,
        q_obs=edge_density(g) if g.n >= 2 else 0.0,
        deviation=violation,
        witness=(),
        method="exact",
        trials=1,
        raw=float(total),
        extra={
            "bound_ok": ok,
            "applicable": applicable,
            "delta_used": delta,
            "upper": upper,
        },
    )


def full_report(
    h: Pattern, g: Graph, p: float, spec: Optional[SamplerSpec] = None
) -> list[DeviationReport]:
    """Run every applicable evaluator; the last entry carries the crude bound."""
    _check_p(p)
    _require_edges(h)
    spec = spec or SamplerSpec()
    reports = [
        edge_discrepancy(g, p, spec),
        c4_deviation(g, p),
        spectral_report(g, p),
        hereditary_deviation(h, g, p, spec),
        labeled_deviation(h, g, p, spec, disjoint=True),
        labeled_deviation(h, g, p, spec, disjoint=False),
    ]
    free_dev = reports[-1].deviation
    reports.append(crude_density_bound(h, g, p, free_dev))
    return reports


def report_list_json(reports: Sequence[DeviationReport]) -> list[dict]:
    return [r.to_json_dict() for r in reports]
