"""Undirected communication graph with hop-distance queries."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
import math

INF = math.inf


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on agents ``0..n-1``.

    Parameters
    ----------
    n : int
        Number of agents.
    edges : iterable of pairs
        Unordered agent pairs. Duplicates (in either orientation) and
        self-loops are rejected.
    """

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __init__(self, n, edges=()):
        if int(n) < 1:
            raise ValueError(f"graph needs at least one node, got n={n}")
        seen = set()
        for e in edges:
            i, j = (int(v) for v in e)
            if not (0 <= i < n and 0 <= j < n):
                raise IndexError(f"edge ({i}, {j}) out of range for n={n}")
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "edges", frozenset(seen))

    @classmethod
    def path(cls, n):
        return cls(n, [(k, k + 1) for k in range(n - 1)])

    @classmethod
    def complete(cls, n):
        return cls(n, [(i, j) for i in range(n) for j in range(i + 1, n)])

    @cached_property
    def adjacency(self):
        adj = [[] for _ in range(self.n)]
        for i, j in sorted(self.edges):
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def _distances(self):
        rows = []
        for src in range(self.n):
            dist = [INF] * self.n
            dist[src] = 0
            queue = deque([src])
            while queue:
                u = queue.popleft()
                for v in self.adjacency[u]:
                    if dist[v] == INF:
                        dist[v] = dist[u] + 1
                        queue.append(v)
            rows.append(tuple(dist))
        return tuple(rows)

    def _check(self, i):
        if not 0 <= i < self.n:
            raise IndexError(f"agent index {i} out of range for n={self.n}")

    def dist(self, i, j):
        """Hop count between ``i`` and ``j``; ``math.inf`` if disconnected."""
        self._check(i)
        self._check(j)
        return self._distances[i][j]

    def neighbors(self, i):
        """One-hop neighborhood of ``i``, including ``i`` itself."""
        return self.khop(i, 1)

    def khop(self, i, kappa):
        """Sorted tuple of agents within ``kappa`` hops of ``i`` (``i`` included)."""
        self._check(i)
        if kappa < 0:
            raise ValueError("kappa must be non-negative")
        row = self._distances[i]
        return tuple(j for j in range(self.n) if row[j] <= kappa)

    def khop_complement(self, i, kappa):
        inside = set(self.khop(i, kappa))
        return tuple(j for j in range(self.n) if j not in inside)

    def khop_others(self, i, kappa):
        """``khop(i, kappa)`` without ``i``."""
        return tuple(j for j in self.khop(i, kappa) if j != i)

    def n_of_kappa(self, kappa):
        """Size of the largest ``kappa``-hop neighborhood."""
        return max(len(self.khop(i, kappa)) for i in range(self.n))

    @cached_property
    def diameter(self):
        """Largest finite hop distance (components are measured separately)."""
        return int(max(d for row in self._distances for d in row if d != INF))

    def to_dict(self):
        return {"n": self.n, "edges": [list(e) for e in sorted(self.edges)]}

    @classmethod
    def from_dict(cls, data):
        return cls(data["n"], [tuple(e) for e in data.get("edges", [])])
