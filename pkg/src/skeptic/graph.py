"""Undirected graphs over vertices 0..d-1 (written 1-indexed in files)."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GraphSpec:
    d: int
    edges: frozenset

    def __post_init__(self):
        edges = frozenset(_normalize(e, self.d) for e in self.edges)
        object.__setattr__(self, "edges", edges)

    @classmethod
    def empty(cls, d):
        return cls(d, frozenset())

    @classmethod
    def from_adjacency(cls, adj, threshold=0.0):
        adj = np.asarray(adj)
        d = adj.shape[0]
        jj, kk = np.nonzero(np.triu(np.abs(adj) > threshold, 1))
        return cls(d, frozenset(zip(jj.tolist(), kk.tolist())))

    def __len__(self):
        return len(self.edges)

    def sorted_edges(self):
        return sorted(self.edges)

    def adjacency(self):
        adj = np.zeros((self.d, self.d), dtype=bool)
        for j, k in self.edges:
            adj[j, k] = adj[k, j] = True
        return adj

    def degrees(self):
        deg = np.zeros(self.d, dtype=int)
        for j, k in self.edges:
            deg[j] += 1
            deg[k] += 1
        return deg

    @property
    def n_pairs(self):
        return self.d * (self.d - 1) // 2


def _normalize(edge, d):
    j, k = (int(v) for v in edge)
    if j == k:
        raise ValueError(f"self-loop ({j}, {k}) not allowed")
    if j > k:
        j, k = k, j
    if j < 0 or k >= d:
        raise ValueError(f"edge ({j}, {k}) out of range for d={d}")
    return (j, k)
