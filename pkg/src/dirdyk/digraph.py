"""Directed graphs with the structural queries the protocol needs."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateEdgeError,
    NodeIndexError,
    NotStronglyConnectedError,
    SelfLoopError,
)

__all__ = [
    "DirectedGraph",
    "build_graph",
    "paper_graph",
    "out_degree",
    "is_strongly_connected",
]


@dataclass(frozen=True)
class DirectedGraph:
    """Immutable directed graph on nodes ``0..node_count-1``.

    Edges keep their input order; edge ``e`` is ``edges[e]`` and every
    per-edge array in the package is indexed the same way.
    """

    node_count: int
    edges: tuple[tuple[int, int], ...]
    sources: np.ndarray = field(init=False, repr=False, compare=False)
    targets: np.ndarray = field(init=False, repr=False, compare=False)
    out_degrees: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        src = np.array([i for i, _ in self.edges], dtype=np.intp)
        dst = np.array([j for _, j in self.edges], dtype=np.intp)
        deg = np.bincount(src, minlength=self.node_count).astype(np.intp)
        for name, arr in (("sources", src), ("targets", dst), ("out_degrees", deg)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(
            self, "_in_edges", tuple(
                tuple(e for e, (_, j) in enumerate(self.edges) if j == v)
                for v in range(self.node_count)
            )
        )

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def in_edges(self, node: int) -> tuple[int, ...]:
        """Indices of edges ending at ``node``."""
        return self._in_edges[node]

    def check_node(self, node: int) -> int:
        if not 0 <= node < self.node_count:
            raise NodeIndexError(f"node {node} out of range [0, {self.node_count})")
        return node

    def check_edge(self, edge: int) -> int:
        if not 0 <= edge < self.edge_count:
            raise NodeIndexError(f"edge {edge} out of range [0, {self.edge_count})")
        return edge

    def out_degree(self, node: int) -> int:
        return int(self.out_degrees[self.check_node(node)])

    def is_strongly_connected(self) -> bool:
        return is_strongly_connected(self)

    def require_strongly_connected(self) -> None:
        if not self.is_strongly_connected():
            raise NotStronglyConnectedError(
                "graph is not strongly connected; the protocol needs every node "
                "to reach every other node"
            )


def build_graph(node_count: int, edges) -> DirectedGraph:
    """Validate ``edges`` (zero-based pairs) and return a graph."""
    node_count = int(node_count)
    if node_count < 1:
        raise NodeIndexError(f"node_count must be >= 1, got {node_count}")
    seen = set()
    clean = []
    for pair in edges:
        i, j = (int(v) for v in pair)
        for v in (i, j):
            if not 0 <= v < node_count:
                raise NodeIndexError(f"edge ({i}, {j}) has endpoint {v} outside [0, {node_count})")
        if i == j:
            raise SelfLoopError(f"self-loop at node {i}")
        if (i, j) in seen:
            raise DuplicateEdgeError(f"duplicate edge ({i}, {j})")
        seen.add((i, j))
        clean.append((i, j))
    return DirectedGraph(node_count, tuple(clean))


def paper_graph() -> DirectedGraph:
    """Six nodes, two directed cycles 1->2->3->5->1 and 2->4->6->2 (one-based)."""
    one_based = [(1, 2), (2, 3), (3, 5), (5, 1), (2, 4), (4, 6), (6, 2)]
    return build_graph(6, [(i - 1, j - 1) for i, j in one_based])


def out_degree(g: DirectedGraph, i: int) -> int:
    return g.out_degree(i)


def _reachable(adj, start):
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def is_strongly_connected(g: DirectedGraph) -> bool:
    """Forward and backward reachability from node 0 both cover the graph."""
    fwd = [[] for _ in range(g.node_count)]
    bwd = [[] for _ in range(g.node_count)]
    for i, j in g.edges:
        fwd[i].append(j)
        bwd[j].append(i)
    n = g.node_count
    return len(_reachable(fwd, 0)) == n and len(_reachable(bwd, 0)) == n
