"""Weighted DAGs, causal orders, reachability and path algebra.

Vertices are integers 0..p-1 throughout the package; the 1-based names
V1..Vp appear only in file formats and error messages.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import CycleDetected, NotAPath


@dataclass(frozen=True)
class Dag:
    """Directed graph with weighted edges; acyclicity is checked by validate_dag.

    An edge ``(i, j)`` means ``i -> j``; its weight is the direct causal
    strength of i on j (entry ``(j, i)`` of the adjacency matrix).
    """

    num_vertices: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...]
    _children: dict[int, list[int]] = field(
        init=False, repr=False, compare=False, hash=False, default_factory=dict
    )

    def __post_init__(self):
        if self.num_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        if len(self.edges) != len(self.weights):
            raise ValueError("edges and weights differ in length")
        seen = set()
        children: dict[int, list[int]] = {v: [] for v in range(self.num_vertices)}
        for (i, j), w in zip(self.edges, self.weights):
            if not (0 <= i < self.num_vertices and 0 <= j < self.num_vertices):
                raise ValueError(f"edge ({i}, {j}) out of range")
            if i == j:
                raise ValueError(f"self loop at vertex {i}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            if not math.isfinite(w) or w == 0.0:
                raise ValueError(f"edge ({i}, {j}) weight must be finite and nonzero")
            seen.add((i, j))
            children[i].append(j)
        for kids in children.values():
            kids.sort()
        object.__setattr__(self, "_children", children)

    @classmethod
    def from_edges(cls, num_vertices: int, weighted_edges: Mapping[tuple[int, int], float]) -> "Dag":
        items = sorted(weighted_edges.items())
        return cls(
            num_vertices,
            tuple(e for e, _ in items),
            tuple(float(w) for _, w in items),
        )

    @property
    def weight_map(self) -> dict[tuple[int, int], float]:
        return dict(zip(self.edges, self.weights))

    def has_edge(self, i: int, j: int) -> bool:
        return j in self._children.get(i, ())

    def weight(self, i: int, j: int) -> float:
        for e, w in zip(self.edges, self.weights):
            if e == (i, j):
                return w
        raise KeyError(f"no edge ({i}, {j})")

    def children(self, v: int) -> tuple[int, ...]:
        return tuple(self._children[v])

    def parents(self, v: int) -> tuple[int, ...]:
        return tuple(i for (i, j) in self.edges if j == v)

    def adjacency_matrix(self) -> np.ndarray:
        """Return A with ``A[j, i]`` the weight of edge i -> j."""
        a = np.zeros((self.num_vertices, self.num_vertices))
        for (i, j), w in zip(self.edges, self.weights):
            a[j, i] = w
        return a


@dataclass(frozen=True)
class CausalOrder:
    """Bijection from vertex index to position 0..p-1 (earlier = upstream)."""

    positions: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.positions) != list(range(len(self.positions))):
            raise ValueError("positions must be a permutation of 0..p-1")

    def position(self, v: int) -> int:
        return self.positions[v]

    def sorted_vertices(self) -> tuple[int, ...]:
        return tuple(np.argsort(self.positions))

    def permutation_matrix(self) -> np.ndarray:
        """P with ``P[position(v), v] = 1``; P A Pᵀ reorders by causal position."""
        p = len(self.positions)
        mat = np.zeros((p, p))
        for v, pos in enumerate(self.positions):
            mat[pos, v] = 1.0
        return mat

    def induced(self, subset: Sequence[int]) -> "CausalOrder":
        """Order induced on ``subset`` (reindexed by ascending vertex)."""
        subset = sorted(subset)
        ranks = {v: r for r, v in enumerate(sorted(subset, key=self.position))}
        return CausalOrder(tuple(ranks[v] for v in subset))


def validate_dag(graph: Dag) -> CausalOrder:
    """Topologically sort ``graph``, breaking ties by ascending vertex index.

    Raises CycleDetected (listing one cycle) for cyclic graphs.
    """
    indeg = [0] * graph.num_vertices
    for _, j in graph.edges:
        indeg[j] += 1
    ready = [v for v in range(graph.num_vertices) if indeg[v] == 0]
    heapq.heapify(ready)
    positions = [-1] * graph.num_vertices
    pos = 0
    while ready:
        v = heapq.heappop(ready)
        positions[v] = pos
        pos += 1
        for child in graph.children(v):
            indeg[child] -= 1
            if indeg[child] == 0:
                heapq.heappush(ready, child)
    if pos < graph.num_vertices:
        raise CycleDetected(_find_cycle(graph, [v for v in range(graph.num_vertices) if positions[v] < 0]))
    return CausalOrder(tuple(positions))


def _find_cycle(graph: Dag, candidates: list[int]) -> list[int]:
    remaining = set(candidates)
    start = min(remaining)
    trail, seen = [], {}
    v = start
    while v not in seen:
        seen[v] = len(trail)
        trail.append(v)
        v = next(c for c in graph.children(v) if c in remaining)
    return trail[seen[v]:]


def reachability(graph: Dag) -> np.ndarray:
    """Boolean matrix R with ``R[i, j]`` true iff a directed path i ⇝ j exists.

    Paths have length >= 1, so the diagonal is False.
    """
    p = graph.num_vertices
    reach = np.zeros((p, p), dtype=bool)
    for v in reversed(validate_dag(graph).sorted_vertices()):
        for c in graph.children(v):
            reach[v, c] = True
            reach[v] |= reach[c]
    return reach


def descendants(graph: Dag, v: int, include_self: bool = False) -> frozenset[int]:
    stack, seen = [v], set()
    while stack:
        u = stack.pop()
        for c in graph.children(u):
            if c not in seen:
                seen.add(c)
                stack.append(c)
    if include_self:
        seen.add(v)
    return frozenset(seen)


def path_weight(graph: Dag, path: Sequence[int]) -> float:
    """Product of edge weights along ``path``; a single vertex yields 1.

    Raises NotAPath if some consecutive pair is not an edge.
    """
    if len(path) == 0:
        raise ValueError("path must contain at least one vertex")
    weights = graph.weight_map
    total = 1.0
    for i, j in zip(path, path[1:]):
        if (i, j) not in weights:
            raise NotAPath(f"({i}, {j}) is not an edge")
        total *= weights[(i, j)]
    return total


def all_paths(graph: Dag, src: int, dst: int, avoid: Iterable[int] = ()) -> Iterator[tuple[int, ...]]:
    """Yield every directed path src ⇝ dst, skipping vertices in ``avoid``.

    Exponential in the worst case; callers gate the graph size.
    """
    avoid = set(avoid)
    if src == dst or src in avoid or dst in avoid:
        return
    stack: list[tuple[int, ...]] = [(src,)]
    while stack:
        path = stack.pop()
        for c in sorted(graph.children(path[-1]), reverse=True):
            if c in avoid or c in path:
                continue
            if c == dst:
                yield path + (c,)
            else:
                stack.append(path + (c,))


def eliminate_vertex(graph: Dag, v: int) -> Dag:
    """Remove ``v``, rerouting every u -> v -> w pair as u -> w weight products.

    Total effects between all remaining vertex pairs are preserved exactly.
    Rerouted weight that cancels an existing edge to exactly zero drops the
    edge. Remaining vertices are compacted (index u becomes u-1 for u > v).
    """
    combined = {}
    in_edges, out_edges = [], []
    for (i, j), w in zip(graph.edges, graph.weights):
        if j == v:
            in_edges.append((i, w))
        elif i == v:
            out_edges.append((j, w))
        else:
            combined[(i, j)] = w
    for i, wi in in_edges:
        for j, wj in out_edges:
            combined[(i, j)] = combined.get((i, j), 0.0) + wi * wj
    shift = lambda u: u if u < v else u - 1
    kept = {(shift(i), shift(j)): w for (i, j), w in combined.items() if w != 0.0}
    return Dag.from_edges(graph.num_vertices - 1, kept)
