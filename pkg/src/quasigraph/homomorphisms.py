"""Constrained homomorphism counting for small patterns.

A pattern is a tiny graph H on vertices {0, ..., r-1}; a constraint tuple
assigns each pattern vertex i a host subset U_i, and the count is the number
of maps phi with phi(i) in U_i for all i and phi(a)phi(b) an edge of the host
for every pattern edge ab.  Counting backtracks over one connected component
at a time in a max-back-degree order, intersecting bitmask neighbourhoods;
the count contributed by the last vertex of a component is a popcount, not a
loop.  All counts are exact integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

from .graphs import Graph, VertexSet, _bits

MAX_PATTERN_VERTICES = 8


@dataclass(frozen=True)
class Pattern:
    """Pattern graph with a designated vertex (default 0)."""

    r: int
    edges: frozenset[tuple[int, int]]
    designated: int = 0

    def __init__(self, r: int, edges: Iterable[tuple[int, int]], designated: int = 0):
        if not 1 <= r <= MAX_PATTERN_VERTICES:
            raise ValueError(f"pattern order {r} outside [1, {MAX_PATTERN_VERTICES}]")
        norm = set()
        for a, b in edges:
            if a == b:
                raise ValueError(f"pattern self-loop at {a}")
            if not (0 <= a < r and 0 <= b < r):
                raise ValueError(f"pattern edge ({a}, {b}) out of range for r={r}")
            norm.add((min(a, b), max(a, b)))
        if not 0 <= designated < r:
            raise ValueError(f"designated vertex {designated} out of range for r={r}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "edges", frozenset(norm))
        object.__setattr__(self, "designated", designated)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return tuple(sorted({b if a == v else a for a, b in self.edges if v in (a, b)}))

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def with_designated(self, v: int) -> "Pattern":
        return Pattern(self.r, self.edges, designated=v)

    def with_min_degree_designated(self) -> "Pattern":
        v = min(range(self.r), key=self.degree)
        return Pattern(self.r, self.edges, designated=v)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def spanning(self, kept: Iterable[tuple[int, int]]) -> "Pattern":
        """Spanning subpattern with only the given edges kept."""
        kept_norm = {(min(a, b), max(a, b)) for a, b in kept}
        extra = kept_norm - self.edges
        if extra:
            raise ValueError(f"edges {sorted(extra)} not in pattern")
        return Pattern(self.r, kept_norm, designated=self.designated)

    def delete_vertex(self, v: int) -> tuple["Pattern", list[int]]:
        """Pattern minus vertex v; returns it plus old ids in new order."""
        if self.r == 1:
            raise ValueError("cannot delete the only pattern vertex")
        keep = [w for w in range(self.r) if w != v]
        relabel = {old: new for new, old in enumerate(keep)}
        edges = [
            (relabel[a], relabel[b]) for a, b in self.edges if a != v and b != v
        ]
        designated = relabel.get(self.designated, 0)
        return Pattern(len(keep), edges, designated=designated), keep

    def merge_vertices(self, i: int, j: int) -> Optional[tuple["Pattern", list[int]]]:
        """Identify j with i.  None when ij is an edge (the merge would loop)."""
        if i == j:
            raise ValueError("cannot merge a vertex with itself")
        if (min(i, j), max(i, j)) in self.edges:
            return None
        keep = [w for w in range(self.r) if w != j]
        relabel = {old: new for new, old in enumerate(keep)}
        target = relabel[i]
        edges = set()
        for a, b in self.edges:
            a2 = target if a == j else relabel[a]
            b2 = target if b == j else relabel[b]
            edges.add((min(a2, b2), max(a2, b2)))
        desig = self.designated
        desig2 = target if desig == j else relabel[desig]
        return Pattern(len(keep), edges, designated=desig2), keep


PRESETS: dict[str, Pattern] = {
    "K2": Pattern(2, [(0, 1)]),
    "K3": Pattern(3, [(0, 1), (0, 2), (1, 2)]),
    "C4": Pattern(4, [(0, 1), (1, 2), (2, 3), (0, 3)]),
    "P3": Pattern(3, [(0, 1), (1, 2)]),
}


def preset(name: str) -> Pattern:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(
            f"unknown pattern preset {name!r}; expected one of {sorted(PRESETS)}"
        ) from None


def read_pattern(path: str) -> Pattern:
    """Read a pattern file: first line r, optional "designated k", edge lines."""
    r: Optional[int] = None
    designated = 0
    edges: list[tuple[int, int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if r is None:
                if len(parts) != 1:
                    raise ValueError(f"{path}:{lineno}: first line must be the order r")
                r = int(parts[0])
                continue
            if parts[0] == "designated":
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: expected 'designated k'")
                designated = int(parts[1])
                continue
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected an edge 'i j'")
            edges.append((int(parts[0]), int(parts[1])))
    if r is None:
        raise ValueError(f"{path}: missing order line")
    try:
        return Pattern(r, edges, designated=designated)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def write_pattern(h: Pattern, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{h.r}\n")
        if h.designated != 0:
            fh.write(f"designated {h.designated}\n")
        for a, b in h.sorted_edges():
            fh.write(f"{a} {b}\n")


class ConstraintTuple:
    """One host subset per pattern vertex.  None entries mean 'all vertices'."""

    __slots__ = ("sets",)

    def __init__(self, sets: Sequence[Optional[VertexSet]]):
        self.sets = tuple(sets)

    @classmethod
    def unconstrained(cls, r: int) -> "ConstraintTuple":
        return cls((None,) * r)

    @classmethod
    def repeat(cls, s: VertexSet, r: int) -> "ConstraintTuple":
        return cls((s,) * r)

    def __len__(self) -> int:
        return len(self.sets)

    def __getitem__(self, i: int) -> Optional[VertexSet]:
        return self.sets[i]

    def with_set(self, i: int, s: Optional[VertexSet]) -> "ConstraintTuple":
        sets = list(self.sets)
        sets[i] = s
        return ConstraintTuple(sets)

    def masks(self, g: Graph) -> list[int]:
        full = g.full_mask
        out = []
        for s in self.sets:
            if s is None:
                out.append(full)
            else:
                g.check_set(s)
                out.append(s.mask)
        return out

    def sizes(self, g: Graph) -> list[int]:
        return [m.bit_count() for m in self.masks(g)]

    def pairwise_disjoint(self) -> bool:
        seen = 0
        for s in self.sets:
            if s is None:
                return len(self.sets) <= 1
            if seen & s.mask:
                return False
            seen |= s.mask
        return True

    def __repr__(self) -> str:
        return f"ConstraintTuple({list(self.sets)!r})"


def _check_constraints(h: Pattern, c: Optional[ConstraintTuple]) -> ConstraintTuple:
    if c is None:
        return ConstraintTuple.unconstrained(h.r)
    if len(c) != h.r:
        raise ValueError(f"constraint tuple has {len(c)} sets, pattern needs {h.r}")
    return c


def _components(h: Pattern) -> list[list[int]]:
    seen = [False] * h.r
    comps = []
    for start in range(h.r):
        if seen[start]:
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in h.neighbors(v):
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(comp)
    return comps


def _component_order(h: Pattern, comp: list[int]) -> list[int]:
    """Greedy max-back-degree order; every non-first vertex has a placed neighbour."""
    comp_set = set(comp)
    start = max(comp, key=lambda v: (h.degree(v), -v))
    order = [start]
    placed = {start}
    while len(order) < len(comp):
        best = None
        best_key = None
        for v in comp_set - placed:
            back = sum(1 for w in h.neighbors(v) if w in placed)
            if back == 0:
                continue
            key = (back, h.degree(v), -v)
            if best_key is None or key > best_key:
                best, best_key = v, key
        order.append(best)
        placed.add(best)
    return order


def _count_component(
    g: Graph, order: list[int], nbrs_back: list[list[int]], masks: list[int]
) -> int:
    """Backtracking count for one connected component."""
    depth_n = len(order)
    if depth_n == 1:
        return masks[0].bit_count()

    def rec(depth: int, images: list[int]) -> int:
        cand = masks[depth]
        for b in nbrs_back[depth]:
            cand &= g.adj[images[b]]
            if not cand:
                return 0
        if depth == depth_n - 1:
            return cand.bit_count()
        total = 0
        for v in _bits(cand):
            images.append(v)
            total += rec(depth + 1, images)
            images.pop()
        return total

    return rec(0, [])


def _prepare(g: Graph, h: Pattern, c: ConstraintTuple):
    masks = c.masks(g)
    plans = []
    for comp in _components(h):
        order = _component_order(h, comp)
        pos = {v: i for i, v in enumerate(order)}
        nbrs_back = [
            [pos[w] for w in h.neighbors(v) if pos[w] < i]
            for i, v in enumerate(order)
        ]
        plans.append((order, nbrs_back, [masks[v] for v in order]))
    return plans


def hom_count(h: Pattern, g: Graph, c: Optional[ConstraintTuple] = None) -> int:
    """Number of constrained homomorphisms of h into g (exact)."""
    c = _check_constraints(h, c)
    total = 1
    for order, nbrs_back, masks in _prepare(g, h, c):
        part = _count_component(g, order, nbrs_back, masks)
        if part == 0:
            return 0
        total *= part
    return total


def hom_count_in_induced(h: Pattern, g: Graph, u: VertexSet) -> int:
    """Homomorphism count into the subgraph induced on u (every image inside u)."""
    return hom_count(h, g, ConstraintTuple.repeat(u, h.r))


def enumerate_homs(
    h: Pattern, g: Graph, c: Optional[ConstraintTuple] = None
) -> Iterator[tuple[int, ...]]:
    """Yield each constrained homomorphism as an image tuple (pattern order)."""
    c = _check_constraints(h, c)
    plans = _prepare(g, h, c)
    image = [0] * h.r

    def rec(plan_idx: int) -> Iterator[tuple[int, ...]]:
        if plan_idx == len(plans):
            yield tuple(image)
            return
        order, nbrs_back, masks = plans[plan_idx]

        def comp_rec(depth: int, images: list[int]) -> Iterator[tuple[int, ...]]:
            if depth == len(order):
                yield from rec(plan_idx + 1)
                return
            cand = masks[depth]
            for b in nbrs_back[depth]:
                cand &= g.adj[images[b]]
            for v in _bits(cand):
                image[order[depth]] = v
                images.append(v)
                yield from comp_rec(depth + 1, images)
                images.pop()

        yield from comp_rec(0, [])

    return rec(0)


def doubled_count(h: Pattern, g: Graph, u: int, v: int) -> int:
    """Pairs of homomorphisms agreeing off the designated vertex, sent to u and v.

    Each pair is determined by the shared map of h minus its designated vertex,
    which must extend by u and by v; so the count is the number of homomorphisms
    of that deleted pattern whose images at former designated-neighbours lie in
    the common neighbourhood of u and v.
    """
    for x in (u, v):
        if not 0 <= x < g.n:
            raise ValueError(f"vertex {x} out of range for n={g.n}")
    d = h.designated
    if h.r == 1:
        return 1
    rest, old_ids = h.delete_vertex(d)
    common = VertexSet.from_mask(g.adj[u] & g.adj[v])
    nbrs = set(h.neighbors(d))
    sets: list[Optional[VertexSet]] = [
        common if old in nbrs else None for old in old_ids
    ]
    return hom_count(rest, g, ConstraintTuple(sets))


def extension_counts(h: Pattern, g: Graph, u: int) -> np.ndarray:
    """Vector over v of doubled_count(h, g, u, v), via one enumeration.

    Enumerates homomorphisms of h minus the designated vertex with designated
    neighbours constrained to N(u), then accumulates, for each one, the mask of
    vertices v it extends to.
    """
    if not 0 <= u < g.n:
        raise ValueError(f"vertex {u} out of range for n={g.n}")
    if h.r == 1:
        return np.ones(g.n, dtype=np.int64)
    d = h.designated
    rest, old_ids = h.delete_vertex(d)
    nbr_ids = set(h.neighbors(d))
    nu = VertexSet.from_mask(g.adj[u])
    sets = [nu if old in nbr_ids else None for old in old_ids]
    nbr_positions = [i for i, old in enumerate(old_ids) if old in nbr_ids]
    counts = np.zeros(g.n, dtype=np.int64)
    bools = g.bool_matrix()
    if not nbr_positions:
        total = hom_count(rest, g, ConstraintTuple(sets))
        return np.full(g.n, total, dtype=np.int64)
    for images in enumerate_homs(rest, g, ConstraintTuple(sets)):
        ext = bools[images[nbr_positions[0]]]
        for pos in nbr_positions[1:]:
            ext = ext & bools[images[pos]]
        counts += ext
    return counts


def partial_weighted_count(
    h: Pattern,
    kept: Iterable[tuple[int, int]],
    g: Graph,
    p: float,
    c: Optional[ConstraintTuple] = None,
) -> float:
    """Sum over constrained tuples of p^(missing edges) times the kept-edge indicator.

    Equals p**(e(h) - |kept|) times the exact count for the spanning subpattern,
    so only the single p power is inexact.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    sub = h.spanning(kept)
    missing = h.edge_count - sub.edge_count
    return (p**missing) * hom_count(sub, g, c)


@dataclass(frozen=True)
class FiltrationStep:
    """One step of an edge filtration; step 0 carries no added edge."""

    k: int
    added_edge: Optional[tuple[int, int]]
    value: float


def filtration_values(
    h: Pattern,
    g: Graph,
    p: float,
    c: Optional[ConstraintTuple] = None,
    order: Optional[Sequence[tuple[int, int]]] = None,
) -> list[FiltrationStep]:
    """Partial weighted counts along a maximal edge filtration of h.

    The first value is the fully weighted product p^e(h) * prod |U_i|; the last
    is the exact homomorphism count.  ``order`` defaults to lexicographic.
    """
    edges = h.sorted_edges() if order is None else [
        (min(a, b), max(a, b)) for a, b in order
    ]
    if sorted(edges) != h.sorted_edges():
        raise ValueError("filtration order must enumerate the pattern edges exactly")
    steps = [FiltrationStep(0, None, partial_weighted_count(h, [], g, p, c))]
    for k in range(1, len(edges) + 1):
        steps.append(
            FiltrationStep(
                k, edges[k - 1], partial_weighted_count(h, edges[:k], g, p, c)
            )
        )
    return steps


def hom_density_estimate(
    h: Pattern,
    g: Graph,
    c: Optional[ConstraintTuple] = None,
    samples: int = 100_000,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte-Carlo estimate of hom_count / prod |U_i|, with its standard error.

    Draws index tuples uniformly from the constraint product; each sample's
    substream is derived from (seed, block) so results do not depend on
    evaluation schedule.
    """
    c = _check_constraints(h, c)
    if samples <= 1:
        raise ValueError("need at least 2 samples")
    masks = c.masks(g)
    if any(m == 0 for m in masks):
        raise ValueError("empty constraint set; density undefined")
    pools = [np.fromiter(_bits(m), dtype=np.int64) for m in masks]
    bools = g.bool_matrix()
    edges = h.sorted_edges()
    block = 65536
    total = 0.0
    total_sq = 0.0
    done = 0
    block_id = 0
    while done < samples:
        take = min(block, samples - done)
        rng = np.random.default_rng([seed, block_id])
        cols = [pool[rng.integers(0, len(pool), size=take)] for pool in pools]
        ok = np.ones(take, dtype=bool)
        for a, b in edges:
            ok &= bools[cols[a], cols[b]]
        total += float(ok.sum())
        total_sq += float(ok.sum())  # indicator: x^2 == x
        done += take
        block_id += 1
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    stderr = float(np.sqrt(var / samples))
    return mean, stderr
