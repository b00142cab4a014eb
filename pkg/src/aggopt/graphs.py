"""Undirected communication topologies and the spectral quantity that
constrains event-trigger parameters."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Graph",
    "SpectralSummary",
    "path",
    "ring",
    "laplacian",
    "is_connected",
    "lambda_bound",
    "random_connected_graph",
    "spectral_summary",
]


@dataclass(frozen=True)
class Graph:
    """Unweighted undirected graph on nodes ``0..n_nodes-1``.

    ``edges`` holds normalized pairs ``(i, j)`` with ``i < j``; use
    :meth:`from_edges` to build a graph from pairs in arbitrary order.
    """

    n_nodes: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if self.n_nodes < 1:
            raise ValueError("graph needs at least one node")
        for i, j in self.edges:
            if not (0 <= i < j < self.n_nodes):
                raise ValueError(
                    f"edge ({i}, {j}) invalid for {self.n_nodes} nodes; "
                    "pairs must be normalized with i < j and no self-loops"
                )

    @classmethod
    def from_edges(cls, n_nodes: int, pairs) -> "Graph":
        norm = set()
        for i, j in pairs:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            norm.add((min(i, j), max(i, j)))
        return cls(n_nodes, frozenset(norm))

    def neighbors(self, node: int) -> tuple[int, ...]:
        out = []
        for i, j in self.edges:
            if i == node:
                out.append(j)
            elif j == node:
                out.append(i)
        return tuple(sorted(out))


@dataclass(frozen=True)
class SpectralSummary:
    """Laplacian, connectivity flag, and the trigger-decay bound lambda."""

    laplacian: np.ndarray
    is_connected: bool
    lambda_bound: float


def path(n: int) -> Graph:
    """Path graph 0-1-...-(n-1)."""
    return Graph(n, frozenset((k, k + 1) for k in range(n - 1)))


def ring(n: int) -> Graph:
    """Cycle graph on n >= 3 nodes."""
    if n < 3:
        raise ValueError("a ring needs at least 3 nodes; use path() for fewer")
    edges = {(k, k + 1) for k in range(n - 1)}
    edges.add((0, n - 1))
    return Graph(n, frozenset(edges))


def laplacian(g: Graph) -> np.ndarray:
    """Graph Laplacian: degree on the diagonal, -1 on adjacent pairs."""
    lap = np.zeros((g.n_nodes, g.n_nodes))
    for i, j in g.edges:
        lap[i, i] += 1.0
        lap[j, j] += 1.0
        lap[i, j] = -1.0
        lap[j, i] = -1.0
    return lap


def is_connected(g: Graph) -> bool:
    """Breadth-first reachability from node 0."""
    adj: list[list[int]] = [[] for _ in range(g.n_nodes)]
    for i, j in g.edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == g.n_nodes


def lambda_bound(lap: np.ndarray, tol: float = 1e-9) -> float:
    """Smallest positive real part among eigenvalues of ``[[I+L, L], [-L, 0]]``.

    Event-trigger decay rates must stay below this value for the estimator
    convergence guarantee to apply. The block matrix is non-symmetric and
    generally has complex eigenvalues, so "positive" is read on real parts,
    consistent with its role as an exponential decay rate.
    """
    lap = np.asarray(lap, dtype=float)
    n = lap.shape[0]
    if lap.shape != (n, n):
        raise ValueError("Laplacian must be square")
    block = np.block([[np.eye(n) + lap, lap], [-lap, np.zeros((n, n))]])
    real_parts = np.linalg.eigvals(block).real
    positive = real_parts[real_parts > tol]
    if positive.size == 0:
        raise ValueError("no eigenvalue with positive real part; malformed Laplacian")
    return float(positive.min())


def random_connected_graph(n: int, seed: int) -> Graph:
    """Random connected graph: a random spanning tree plus each remaining
    edge independently with probability 0.2. Deterministic per (n, seed)."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    edges: set[tuple[int, int]] = set()
    for k in range(1, n):
        u = int(order[rng.integers(0, k)])
        v = int(order[k])
        edges.add((min(u, v), max(u, v)))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < 0.2:
                edges.add((i, j))
    return Graph(n, frozenset(edges))


def spectral_summary(g: Graph) -> SpectralSummary:
    lap = laplacian(g)
    return SpectralSummary(
        laplacian=lap,
        is_connected=is_connected(g),
        lambda_bound=lambda_bound(lap),
    )
