"""Centralized reference answers, written for obviousness rather than speed."""
from __future__ import annotations

import math
from collections import Counter, deque

import numpy as np

from .instances import DisjInstance, GraphPartitionInstance, SetFamilyInstance

INF = math.inf


class GlobalGraph:
    """Union of every site's edges as sorted adjacency lists (1-based)."""

    def __init__(self, n: int, edges):
        self.n = n
        nbrs = [set() for _ in range(n + 1)]
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        self.adj = [sorted(s) for s in nbrs]

    @classmethod
    def of(cls, inst: GraphPartitionInstance) -> "GlobalGraph":
        return cls(inst.n, inst.edge_set())

    def edges(self) -> list:
        return [(u, v) for u in range(1, self.n + 1) for v in self.adj[u] if u < v]

    @property
    def m(self) -> int:
        return sum(len(a) for a in self.adj) // 2


def _graph(g) -> GlobalGraph:
    return GlobalGraph.of(g) if isinstance(g, GraphPartitionInstance) else g


def oracle_f0(inst: SetFamilyInstance) -> int:
    return len(set().union(*inst.sets)) if inst.sets else 0


def oracle_linfty(inst: SetFamilyInstance) -> tuple[int, int]:
    counts = Counter(e for s in inst.sets for e in s)
    if not counts:
        raise ValueError("all sets are empty")
    best = max(counts.values())
    return min(e for e, c in counts.items() if c == best), best


def oracle_degree(g, v: int) -> int:
    return len(_graph(g).adj[v])


class _DSU:
    def __init__(self, n):
        self.parent = list(range(n + 1))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


def oracle_has_cycle(g) -> bool:
    g = _graph(g)
    dsu = _DSU(g.n)
    return any(not dsu.union(u, v) for u, v in g.edges())


def oracle_num_cc(g) -> int:
    g = _graph(g)
    dsu = _DSU(g.n)
    for u, v in g.edges():
        dsu.union(u, v)
    return len({dsu.find(x) for x in range(1, g.n + 1)})


def oracle_connected(g) -> bool:
    return oracle_num_cc(g) == 1


def oracle_bipartite(g) -> bool:
    g = _graph(g)
    color = [None] * (g.n + 1)
    for s in range(1, g.n + 1):
        if color[s] is not None:
            continue
        color[s] = 0
        q = deque([s])
        while q:
            x = q.popleft()
            for y in g.adj[x]:
                if color[y] is None:
                    color[y] = 1 - color[x]
                    q.append(y)
                elif color[y] == color[x]:
                    return False
    return True


def oracle_triangle_free(g) -> bool:
    g = _graph(g)
    nb = [set(a) for a in g.adj]
    return not any(nb[u] & nb[v] for u, v in g.edges())


def bfs_distances(g, root: int) -> list:
    g = _graph(g)
    dist = [INF] * (g.n + 1)
    dist[root] = 0
    q = deque([root])
    while q:
        x = q.popleft()
        for y in g.adj[x]:
            if dist[y] == INF:
                dist[y] = dist[x] + 1
                q.append(y)
    return dist


def oracle_diameter(g):
    """Largest pairwise distance by all-pairs BFS; inf when disconnected."""
    g = _graph(g)
    best = 0
    for s in range(1, g.n + 1):
        d = max(bfs_distances(g, s)[1:])
        if d == INF:
            return INF
        best = max(best, d)
    return best


def oracle_diameter_fw(g):
    """Floyd-Warshall cross-check for :func:`oracle_diameter`."""
    g = _graph(g)
    n = g.n
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0)
    for u, v in g.edges():
        d[u - 1, v - 1] = d[v - 1, u - 1] = 1
    for w in range(n):
        d = np.minimum(d, d[:, w:w + 1] + d[w:w + 1, :])
    best = d.max() if n else 0
    return INF if np.isinf(best) else int(best)


def oracle_disj(d: DisjInstance) -> int:
    return int(bool(set(d.x) & set(d.y)))


def oracle_or_disj(inst) -> int:
    ys = set(inst.Y)
    return int(any(ys.intersection(x) for x in inst.X))


from .distributions import eval_thresh as oracle_thresh  # noqa: E402
