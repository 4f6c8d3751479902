"""Simple undirected graphs in edge-list plus CSR form.

Vertex ids are 0-based inside the library; the text formats written by
:mod:`girg.io` use 1-based ids.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import UsageError


class Graph:
    """An immutable simple graph.

    ``edges`` is an ``(m, 2)`` int64 array with ``u < v`` in every row, sorted
    lexicographically.  ``offsets``/``neighbors`` hold the sorted adjacency of
    every vertex (CSR).
    """

    __slots__ = ("n", "edges", "offsets", "neighbors")

    def __init__(self, n: int, edges, *, validate: bool = True):
        n = int(n)
        if n < 0:
            raise UsageError("vertex count must be non-negative")
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if validate:
            if e.size and (e.min() < 0 or e.max() >= n):
                raise UsageError("edge endpoint out of range")
            if np.any(e[:, 0] == e[:, 1]):
                raise UsageError("self-loops are not allowed")
        e = sort_edges(np.sort(e, axis=1), n)
        if validate and e.shape[0] > 1:
            dup = np.all(e[1:] == e[:-1], axis=1)
            if dup.any():
                raise UsageError("duplicate edges are not allowed")
        self.n = n
        self.edges = np.ascontiguousarray(e)
        self.offsets, self.neighbors = _csr(n, self.edges)
        for a in (self.edges, self.offsets, self.neighbors):
            a.setflags(write=False)

    @classmethod
    def from_adjacency(cls, adjacency: list[list[int]]) -> "Graph":
        pairs = [(u, v) for u, nb in enumerate(adjacency) for v in nb if u < v]
        return cls(len(adjacency), pairs)

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def degree(self, v: int) -> int:
        return int(self.offsets[v + 1] - self.offsets[v])

    def neighbors_of(self, v: int) -> np.ndarray:
        return self.neighbors[self.offsets[v]:self.offsets[v + 1]]

    def adjacency(self) -> list[list[int]]:
        return [self.neighbors_of(v).tolist() for v in range(self.n)]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors_of(u)
        i = np.searchsorted(nb, v)
        return bool(i < nb.size and nb[i] == v)

    def relabel(self, new_id: np.ndarray) -> "Graph":
        """Graph with vertex ``v`` renamed to ``new_id[v]``."""
        new_id = np.asarray(new_id, dtype=np.int64)
        return Graph(self.n, new_id[self.edges], validate=False)

    def edge_keys(self) -> np.ndarray:
        return self.edges[:, 0] * np.int64(max(self.n, 1)) + self.edges[:, 1]

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash((self.n, self.edges.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def sort_edges(edges: np.ndarray, n: int) -> np.ndarray:
    """Rows ``(u, v)`` with ``u < v`` sorted lexicographically."""
    if edges.shape[0] < 2:
        return np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
    key = np.sort(edges[:, 0] * np.int64(n) + edges[:, 1])
    return np.column_stack([key // n, key % n])


def _csr(n: int, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return _kernels.csr_from_edges(n, edges)
