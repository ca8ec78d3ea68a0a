"""Static visibility graphs and node placements for experiments.

An edge means two vehicles can see each other's beacons. Generators:

- line: a narrow street, each vehicle sees only the vehicle immediately
  in front and behind.
- triangular: a multi-lane road laid out as a triangular lattice; a
  vehicle sees its lane neighbors and the vehicles ahead of it.
- complete: everyone sees everyone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

Position = tuple[float, float]
Edge = tuple[int, int]

_LANE_WIDTH_M = 3.5
_ROW_SPACING_M = 10.0


@dataclass(frozen=True)
class VisibilityGraph:
    name: str
    n: int
    edges: tuple[Edge, ...]
    positions: tuple[Position, ...]

    def __post_init__(self):
        seen = set()
        for a, b in self.edges:
            if a == b:
                raise ValueError("self-loops are not allowed")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValueError(f"edge ({a}, {b}) out of range")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise ValueError(f"duplicate edge ({a}, {b})")
            seen.add(key)
        if len(self.positions) != self.n:
            raise ValueError("positions must cover every node")

    def adjacency(self) -> dict[int, tuple[int, ...]]:
        neigh: dict[int, set[int]] = {i: set() for i in range(self.n)}
        for a, b in self.edges:
            neigh[a].add(b)
            neigh[b].add(a)
        return {i: tuple(sorted(s)) for i, s in neigh.items()}

    def degree(self, i: int) -> int:
        return len(self.adjacency()[i])

    def is_connected(self) -> bool:
        adj = self.adjacency()
        seen = {0}
        stack = [0]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return len(seen) == self.n


def line_graph(n: int) -> VisibilityGraph:
    _check_n(n)
    edges = tuple((i, i + 1) for i in range(n - 1))
    positions = tuple((i * _ROW_SPACING_M, 0.0) for i in range(n))
    return VisibilityGraph("line", n, edges, positions)


def complete_graph(n: int) -> VisibilityGraph:
    _check_n(n)
    edges = tuple((i, j) for i in range(n) for j in range(i + 1, n))
    radius = 50.0
    positions = tuple(
        (radius * math.cos(2 * math.pi * i / n),
         radius * math.sin(2 * math.pi * i / n)) for i in range(n))
    return VisibilityGraph("complete", n, edges, positions)


def triangular_lattice_graph(n: int, lanes: int = 3) -> VisibilityGraph:
    """Rows of `lanes` vehicles; each vehicle sees its lane neighbors and
    the two vehicles in front of it (same lane and one lane over)."""
    _check_n(n)
    if lanes < 2:
        raise ValueError("lanes must be at least 2")
    edges = []
    for i in range(n):
        row, col = divmod(i, lanes)
        if col + 1 < lanes and i + 1 < n:
            edges.append((i, i + 1))                    # lane neighbor
        ahead = i + lanes
        if ahead < n:
            edges.append((i, ahead))                    # straight ahead
        diag = i + lanes + 1
        if col + 1 < lanes and diag < n:
            edges.append((i, diag))                     # ahead, one lane over
    positions = tuple(
        ((i // lanes) * _ROW_SPACING_M, (i % lanes) * _LANE_WIDTH_M)
        for i in range(n))
    return VisibilityGraph("triangular", n, tuple(edges), positions)


def custom_graph(n: int, edges: list[Edge],
                 positions: list[Position] | None = None,
                 name: str = "custom") -> VisibilityGraph:
    _check_n(n)
    if positions is None:
        positions = [(i * _ROW_SPACING_M, 0.0) for i in range(n)]
    return VisibilityGraph(name, n, tuple(edges), tuple(positions))


_GENERATORS = {
    "line": line_graph,
    "complete": complete_graph,
    "triangular": triangular_lattice_graph,
}


def make_graph(kind: str, n: int = 21) -> VisibilityGraph:
    if kind not in _GENERATORS:
        raise ValueError(f"unknown graph kind {kind!r}; choose from {sorted(_GENERATORS)}")
    return _GENERATORS[kind](n)


def _check_n(n: int) -> None:
    if n < 2:
        raise ValueError(f"graph needs at least 2 nodes, got {n}")
