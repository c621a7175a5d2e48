"""Simple undirected graphs on vertex set {0, ..., n-1}.

Adjacency is stored as one Python integer bitmask per vertex, so neighbourhood
intersections used by the counting routines are word-parallel.  Graphs are
immutable after construction; cached quantities (edge count, degrees, the
dense boolean matrix) are therefore safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

DEFAULT_MAX_VERTICES = 4096

GENERATOR_KINDS = ("erdos_renyi", "planted_dense", "complete", "empty", "file")


def _mask_of(vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class VertexSet:
    """An immutable subset of {0, ..., n-1}, kept as a bitmask."""

    __slots__ = ("mask", "size")

    def __init__(self, members: Iterable[int] = ()):
        mask = 0
        for v in members:
            if v < 0:
                raise ValueError(f"negative vertex id {v}")
            mask |= 1 << v
        self.mask = mask
        self.size = mask.bit_count()

    @classmethod
    def from_mask(cls, mask: int) -> "VertexSet":
        if mask < 0:
            raise ValueError("vertex-set mask must be non-negative")
        out = object.__new__(cls)
        out.mask = mask
        out.size = mask.bit_count()
        return out

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(_bits(self.mask))

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator[int]:
        return _bits(self.mask)

    def __contains__(self, v: int) -> bool:
        return v >= 0 and (self.mask >> v) & 1 == 1

    def __eq__(self, other: object) -> bool:
        return isinstance(other, VertexSet) and self.mask == other.mask

    def __hash__(self) -> int:
        return hash(self.mask)

    def __repr__(self) -> str:
        return f"VertexSet({list(self.members)!r})"


class Graph:
    """Undirected simple graph with bitmask adjacency rows."""

    __slots__ = ("n", "adj", "_edge_count", "_degrees", "_bool_matrix")

    def __init__(self, n: int, adj: Sequence[int], edge_count: int):
        self.n = n
        self.adj = tuple(adj)
        self._edge_count = edge_count
        self._degrees: Optional[tuple[int, ...]] = None
        self._bool_matrix: Optional[np.ndarray] = None

    @property
    def edge_count(self) -> int:
        return self._edge_count

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def degree(self, v: int) -> int:
        if not 0 <= v < self.n:
            raise ValueError(f"vertex {v} out of range for n={self.n}")
        return self.adj[v].bit_count()

    def degree_sequence(self) -> tuple[int, ...]:
        if self._degrees is None:
            self._degrees = tuple(row.bit_count() for row in self.adj)
        return self._degrees

    def has_edge(self, u: int, v: int) -> bool:
        return 0 <= u < self.n and (self.adj[u] >> v) & 1 == 1

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n):
            for v in _bits(self.adj[u] >> (u + 1)):
                yield (u, v + u + 1)

    def neighbors(self, v: int) -> VertexSet:
        return VertexSet.from_mask(self.adj[v])

    def bool_matrix(self) -> np.ndarray:
        """Dense symmetric boolean adjacency, built lazily for numpy paths."""
        if self._bool_matrix is None:
            m = np.zeros((self.n, self.n), dtype=bool)
            for u in range(self.n):
                row = self.adj[u]
                for v in _bits(row):
                    m[u, v] = True
            self._bool_matrix = m
        return self._bool_matrix

    def check_set(self, s: VertexSet) -> None:
        if s.mask >> self.n:
            raise ValueError(
                f"vertex set {list(s.members)} not contained in range(0, {self.n})"
            )

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self._edge_count})"


def build_graph(
    n: int,
    edges: Iterable[tuple[int, int]],
    max_vertices: int = DEFAULT_MAX_VERTICES,
) -> Graph:
    """Build a graph from an edge list, rejecting loops, duplicates and bad ids."""
    if n < 0:
        raise ValueError(f"vertex count must be non-negative, got {n}")
    if n > max_vertices:
        raise ValueError(f"n={n} exceeds the vertex cap {max_vertices}")
    adj = [0] * n
    count = 0
    for u, v in edges:
        if u == v:
            raise ValueError(f"self-loop at vertex {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
        if (adj[u] >> v) & 1:
            raise ValueError(f"duplicate edge ({u}, {v})")
        adj[u] |= 1 << v
        adj[v] |= 1 << u
        count += 1
    return Graph(n, adj, count)


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for a graph instance; a pure function of its fields.

    ``path`` is only meaningful for kind="file" (the on-disk format below).
    """

    kind: str = "erdos_renyi"
    n: int = 0
    p: float = 0.5
    plant_fraction: float = 0.25
    plant_boost: float = 0.0
    seed: int = 0
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise ValueError(
                f"unknown generator kind {self.kind!r}; expected one of {GENERATOR_KINDS}"
            )

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "n": self.n,
            "p": self.p,
            "plant_fraction": self.plant_fraction,
            "plant_boost": self.plant_boost,
            "seed": self.seed,
        }
        if self.path is not None:
            out["path"] = self.path
        return out


def _check_probability(p: float, name: str) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name}={p} outside [0, 1]")


def generate(spec: GeneratorSpec) -> Graph:
    """Materialise a GeneratorSpec.  Same spec (same seed) gives the same graph."""
    kind = spec.kind
    if kind == "file":
        if not spec.path:
            raise ValueError("generator kind 'file' requires a path")
        return read_graph(spec.path)
    n = spec.n
    if n < 0:
        raise ValueError(f"vertex count must be non-negative, got {n}")
    if kind == "complete":
        return build_graph(n, ((u, v) for u in range(n) for v in range(u + 1, n)))
    if kind == "empty":
        return build_graph(n, ())
    _check_probability(spec.p, "p")
    rng = np.random.default_rng(spec.seed)
    if kind == "erdos_renyi":
        return _bernoulli_graph(n, spec.p, rng)
    # planted_dense: background G(n, p), then the pairs inside a seeded plant
    # set are redrawn at probability p + plant_boost.
    if not 0.0 <= spec.plant_fraction <= 1.0:
        raise ValueError(f"plant_fraction={spec.plant_fraction} outside [0, 1]")
    boosted = spec.p + spec.plant_boost
    if not 0.0 <= boosted <= 1.0:
        raise ValueError(f"p + plant_boost = {boosted} outside [0, 1]")
    g = _bernoulli_graph(n, spec.p, rng)
    plant = planted_set(spec)
    adj = list(g.adj)
    count = g.edge_count
    members = list(plant.members)
    for i, u in enumerate(members):
        for v in members[i + 1 :]:
            present = (adj[u] >> v) & 1
            keep = 1 if rng.random() < boosted else 0
            if present and not keep:
                adj[u] ^= 1 << v
                adj[v] ^= 1 << u
                count -= 1
            elif keep and not present:
                adj[u] |= 1 << v
                adj[v] |= 1 << u
                count += 1
    return Graph(n, adj, count)


def planted_set(spec: GeneratorSpec) -> VertexSet:
    """The plant chosen by a planted_dense spec (depends only on n, fraction, seed)."""
    size = int(spec.plant_fraction * spec.n)
    rng = np.random.default_rng([spec.seed, 0x9E3779B9])
    members = rng.choice(spec.n, size=size, replace=False) if size else []
    return VertexSet(int(v) for v in members)


def _bernoulli_graph(n: int, p: float, rng: np.random.Generator) -> Graph:
    adj = [0] * n
    count = 0
    for u in range(n):
        if u + 1 >= n:
            break
        draws = rng.random(n - u - 1) < p
        row = 0
        for j in np.nonzero(draws)[0]:
            v = u + 1 + int(j)
            row |= 1 << v
            adj[v] |= 1 << u
            count += 1
        adj[u] |= row
    return Graph(n, adj, count)


def edge_density(g: Graph) -> float:
    if g.n < 2:
        raise ValueError(f"edge density undefined for n={g.n} < 2")
    return g.edge_count / (g.n * (g.n - 1) // 2)


def edges_within(g: Graph, s: VertexSet) -> int:
    """Number of (unordered) edges with both endpoints in s."""
    g.check_set(s)
    mask = s.mask
    total = 0
    for v in _bits(mask):
        total += (g.adj[v] & mask).bit_count()
    return total // 2


def edges_between(g: Graph, a: VertexSet, b: VertexSet) -> int:
    """Ordered pairs (u, v) with u in a, v in b, uv an edge.

    Shared vertices contribute in both orders, so edges_between(s, s) equals
    twice edges_within(s).
    """
    g.check_set(a)
    g.check_set(b)
    bmask = b.mask
    total = 0
    for u in _bits(a.mask):
        total += (g.adj[u] & bmask).bit_count()
    return total


def degree(g: Graph, v: int) -> int:
    return g.degree(v)


def degree_sequence(g: Graph) -> tuple[int, ...]:
    return g.degree_sequence()


def read_graph(path: str, max_vertices: int = DEFAULT_MAX_VERTICES) -> Graph:
    """Read the text format: header "n m", then m lines "u v" with u < v.

    '#' starts a comment; blank lines are skipped.  Errors carry line numbers.
    """
    header: Optional[tuple[int, int]] = None
    edges: list[tuple[int, int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two integers, got {line!r}")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: expected two integers, got {line!r}"
                ) from None
            if header is None:
                if a < 0 or b < 0:
                    raise ValueError(f"{path}:{lineno}: negative header values")
                header = (a, b)
                continue
            n = header[0]
            if a == b:
                raise ValueError(f"{path}:{lineno}: self-loop at vertex {a}")
            if not a < b:
                raise ValueError(f"{path}:{lineno}: edge must satisfy u < v, got {a} {b}")
            if b >= n:
                raise ValueError(f"{path}:{lineno}: vertex {b} out of range for n={n}")
            edges.append((a, b))
    if header is None:
        raise ValueError(f"{path}: missing 'n m' header line")
    n, m = header
    if len(edges) != m:
        raise ValueError(f"{path}: header declares {m} edges, found {len(edges)}")
    try:
        return build_graph(n, edges, max_vertices=max_vertices)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def write_graph(g: Graph, path: str) -> None:
    """Write the text format; edges emitted sorted lexicographically."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{g.n} {g.edge_count}\n")
        for u, v in sorted(g.edges()):
            fh.write(f"{u} {v}\n")
