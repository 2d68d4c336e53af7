"""Graph protocols over edge-partitioned inputs.

Site 0 plays P_1 and reports every answer.  Vertices travel as 1-based
vertex ids inside Edge/EdgeList payloads and as 0-based ids inside
ElementList payloads (universe n).
"""
from __future__ import annotations

import math
from collections import deque

from ..answers import BfsResult, Bool, CCCount, Degree, Diameter, ElementSet
from ..instances import GraphPartitionInstance, ThreshInstance
from ..kernel import (BitVector, Composite, EdgeList, ElementList, Protocol, UInt,
                      UsageError, run_protocol)


def _clog2(x: int) -> int:
    return (x - 1).bit_length() if x > 1 else 0


def _adjacency(edges) -> dict:
    adj: dict = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    for nb in adj.values():
        nb.sort()
    return adj


class _DSU:
    def __init__(self, n: int):
        self.parent = list(range(n + 1))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if ra < rb:
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb
        return True


def spanning_forest(edges, n: int) -> list:
    """Forest edges picked greedily in lexicographic edge order."""
    dsu = _DSU(n)
    return [e for e in sorted(edges) if dsu.union(*e)]


def _has_cycle(edges, n: int) -> bool:
    dsu = _DSU(n)
    return any(not dsu.union(u, v) for u, v in edges)


class _GraphProtocol(Protocol):
    instance_type = GraphPartitionInstance
    needs_nodup = False

    def check(self, inst):
        super().check(inst)
        if self.needs_nodup and inst.allow_duplication:
            raise UsageError(f"{self.name} requires an instance without edge duplication")

    def public(self, inst) -> dict:
        return {"n": inst.n}

    def split(self, inst):
        return self.public(inst), [list(es) for es in inst.local_edges]


# ---------------------------------------------------------------------------
# degree


class _DegreeBase(_GraphProtocol):
    def __init__(self, v: int):
        self.v = v

    def check(self, inst):
        super().check(inst)
        if not 1 <= self.v <= inst.n:
            raise UsageError(f"query vertex {self.v} outside [1, {inst.n}]")


class DegreeNoDup(_DegreeBase):
    """Each site reports its local degree of v; P_1 adds them up."""
    name = "degree_nodup"
    needs_nodup = True

    def program(self, ctx):
        n, v = ctx.public["n"], self.v
        local = sum(1 for e in ctx.input if v in e)
        if ctx.site != 0:
            ctx.send(0, UInt(local, n - 1))
            return
        got = yield from ctx.wait_for(range(1, ctx.k))
        return Degree(local + sum(p.value for ps in got.values() for p in ps))


class DegreeDup(_DegreeBase):
    """Each site ships its neighbours of v; P_1 counts the distinct ones."""
    name = "degree_dup"

    def program(self, ctx):
        n, v = ctx.public["n"], self.v
        nbrs = sorted({b if a == v else a for a, b in ctx.input if v in (a, b)})
        if ctx.site != 0:
            ctx.send(0, ElementList([w - 1 for w in nbrs], n, n - 1))
            return
        got = yield from ctx.wait_for(range(1, ctx.k))
        seen = set(nbrs)
        for ps in got.values():
            for p in ps:
                seen.update(w + 1 for w in p.ids)
        return Degree(len(seen))


# ---------------------------------------------------------------------------
# cycle-freeness


class CycleFreeNoDup(_GraphProtocol):
    """Phase 1: sites report min(m_i, n); if the total reaches n there is a
    cycle and nothing else is sent.  Otherwise P_1 broadcasts a go bit and
    the sites ship their edges for a union-find check.  Answer: Bool(cycle-free)."""
    name = "cycle_free_nodup"
    needs_nodup = True

    def program(self, ctx):
        n = ctx.public["n"]
        if ctx.site != 0:
            ctx.send(0, UInt(min(len(ctx.input), n), n))
            yield from ctx.wait_for([0])
            ctx.send(0, EdgeList(ctx.input, n, max(n - 1, 0)))
            return
        got = yield from ctx.wait_for(range(1, ctx.k))
        total = len(ctx.input) + sum(p.value for ps in got.values() for p in ps)
        if total >= n:
            return Bool(False)
        ctx.broadcast(UInt(1, 1))
        edges = list(ctx.input)
        got = yield from ctx.wait_for(range(1, ctx.k))
        for ps in got.values():
            for p in ps:
                edges.extend(p.edges)
        return Bool(not _has_cycle(edges, n))


class CycleFreeDup(_GraphProtocol):
    """Sites first report a 1-bit local-cycle flag.  If nobody (P_1 included)
    sees a local cycle, P_1 broadcasts a go bit and every site ships its
    local forest, at most n-1 edges."""
    name = "cycle_free_dup"

    def program(self, ctx):
        n = ctx.public["n"]
        local_cycle = _has_cycle(ctx.input, n)
        if ctx.site != 0:
            ctx.send(0, UInt(int(local_cycle), 1))
            yield from ctx.wait_for([0])
            ctx.send(0, EdgeList(ctx.input, n, max(n - 1, 0)))
            return
        got = yield from ctx.wait_for(range(1, ctx.k))
        if local_cycle or any(p.value for ps in got.values() for p in ps):
            return Bool(False)
        ctx.broadcast(UInt(1, 1))
        edges = set(ctx.input)
        got = yield from ctx.wait_for(range(1, ctx.k))
        for ps in got.values():
            for p in ps:
                edges.update(p.edges)
        return Bool(not _has_cycle(sorted(edges), n))


# ---------------------------------------------------------------------------
# connectivity


def _ship_forest(ctx, n):
    ctx.send(0, EdgeList(spanning_forest(ctx.input, n), n, max(n - 1, 0)))


def _collect_forests(ctx, n):
    """P_1 side: gather every site's forest; returns a DSU over all of them."""
    dsu = _DSU(n)
    for u, v in ctx.input:
        dsu.union(u, v)
    got = yield from ctx.wait_for(range(1, ctx.k))
    for ps in got.values():
        for p in ps:
            for u, v in p.edges:
                dsu.union(u, v)
    return dsu


def _components(dsu: _DSU, n: int) -> list:
    """Smallest vertex of each component, ascending."""
    return [x for x in range(1, n + 1) if dsu.find(x) == x]


class Connectivity(_GraphProtocol):
    """Sites ship local spanning forests; P_1 unions them."""
    name = "connectivity"

    def program(self, ctx):
        n = ctx.public["n"]
        if ctx.site != 0:
            _ship_forest(ctx, n)
            return
        dsu = yield from _collect_forests(ctx, n)
        return Bool(len(_components(dsu, n)) == 1)


class NumCC(Connectivity):
    name = "num_cc"

    def program(self, ctx):
        n = ctx.public["n"]
        if ctx.site != 0:
            _ship_forest(ctx, n)
            return
        dsu = yield from _collect_forests(ctx, n)
        return CCCount(len(_components(dsu, n)))


# ---------------------------------------------------------------------------
# layered BFS, several independent searches at once


def _discover(adj, frontier, visited):
    """Local step of one BFS layer.  ``visited`` already contains the
    frontier.  Returns ({new vertex: smallest frontier parent}, odd) where
    odd means a local edge joins two frontier vertices."""
    found: dict = {}
    odd = False
    fset = set(frontier)
    for f in frontier:
        for w in adj.get(f, ()):
            if w in visited:
                if w in fset:
                    odd = True
            elif w not in found or f < found[w]:
                found[w] = f
    return found, odd


def _bfs_sites(ctx, adj, n, nsearch):
    """Non-P_1 side: answer frontier broadcasts until all frontiers are empty."""
    visited = [set() for _ in range(nsearch)]
    while True:
        got = yield from ctx.wait_for([0])
        frontiers = [[i + 1 for i in part.ids] for part in got[0][0].parts]
        if not any(frontiers):
            return
        replies, odd = [], []
        for s, front in enumerate(frontiers):
            visited[s].update(front)
            found, o = _discover(adj, front, visited[s])
            replies.append(EdgeList(sorted((f, w) for w, f in found.items()), n, n))
            if o:
                odd.append(s)
        ctx.send(0, Composite(replies))
        if odd:
            ctx.send(0, ElementList(odd, nsearch, nsearch))


def _bfs_p1(ctx, adj, n, searches):
    """P_1 side.  ``searches`` is a list of root lists; returns one
    BfsResult per search.  Ends by broadcasting all-empty frontiers."""
    results = []
    layer = [dict.fromkeys(roots, 0) for roots in searches]
    parent = [dict() for _ in searches]
    visited = [set(roots) for roots in searches]
    odd = [False] * len(searches)
    frontier = [sorted(set(roots)) for roots in searches]
    depth = 0
    while True:
        ctx.broadcast(Composite([ElementList([v - 1 for v in f], n, n) for f in frontier]))
        if not any(frontier):
            break
        proposals = []
        for s, front in enumerate(frontier):
            found, o = _discover(adj, front, visited[s])
            proposals.append(found)
            odd[s] |= o
        got = yield from ctx.wait_for(range(1, ctx.k))
        for ps in got.values():
            for p in ps:
                if isinstance(p, ElementList):
                    for s in p.ids:
                        odd[s] = True
                    continue
                for s, part in enumerate(p.parts):
                    found = proposals[s]
                    for f, w in part.edges:
                        if w not in found or f < found[w]:
                            found[w] = f
        depth += 1
        for s, found in enumerate(proposals):
            nxt = sorted(found)
            for w in nxt:
                parent[s][w] = found[w]
                layer[s][w] = depth
            visited[s].update(nxt)
            frontier[s] = nxt
    for s, roots in enumerate(searches):
        results.append(BfsResult(tuple(sorted(set(roots))), parent[s], layer[s], odd[s]))
    return results


class BfsTree(_GraphProtocol):
    """Layer-by-layer BFS from ``root``: P_1 broadcasts the frontier, sites
    reply with unvisited local neighbours; visited sets are replicated from
    the broadcasts.  A site that sees a local edge inside a layer flags an
    odd cycle."""
    name = "bfs_tree"

    def __init__(self, root: int):
        self.root = root

    def check(self, inst):
        super().check(inst)
        if not 1 <= self.root <= inst.n:
            raise UsageError(f"root {self.root} outside [1, {inst.n}]")

    def program(self, ctx):
        n = ctx.public["n"]
        adj = _adjacency(ctx.input)
        if ctx.site != 0:
            yield from _bfs_sites(ctx, adj, n, 1)
            return
        (res,) = yield from _bfs_p1(ctx, adj, n, [[self.root]])
        return res


class Bipartiteness(_GraphProtocol):
    """Connectivity first (smallest vertex of each component is its root),
    then one multi-root BFS; bipartite iff no site sees an intra-layer edge."""
    name = "bipartiteness"

    def program(self, ctx):
        n = ctx.public["n"]
        adj = _adjacency(ctx.input)
        if ctx.site != 0:
            _ship_forest(ctx, n)
            yield from _bfs_sites(ctx, adj, n, 1)
            return
        dsu = yield from _collect_forests(ctx, n)
        (res,) = yield from _bfs_p1(ctx, adj, n, [_components(dsu, n)])
        return Bool(not res.odd_cycle_found)


# ---------------------------------------------------------------------------
# triangles


def _triangle_free(edges) -> bool:
    nb: dict = {}
    for u, v in edges:
        nb.setdefault(u, set()).add(v)
        nb.setdefault(v, set()).add(u)
    return not any(nb[u] & nb[v] for u, v in edges)


class TriangleFree(_GraphProtocol):
    """Every site ships all its edges; P_1 checks neighbourhood intersections."""
    name = "triangle_free"

    def program(self, ctx):
        n = ctx.public["n"]
        if ctx.site != 0:
            ctx.send(0, EdgeList(ctx.input, n, n * (n - 1) // 2))
            return
        edges = set(ctx.input)
        got = yield from ctx.wait_for(range(1, ctx.k))
        for ps in got.values():
            for p in ps:
                edges.update(p.edges)
        return Bool(_triangle_free(edges))


# ---------------------------------------------------------------------------
# Reconstruct-Y


class ReconstructY(Protocol):
    """For every column j, P_1 asks c_Y * ceil(log2 r) uniformly random
    sites (with replacement) for bit j; j goes into the estimate when the
    sum of replies is below ``threshold`` * samples.

    Columns in Y are almost always all-zero, while columns outside Y hold a
    1 in about a third of the rows; 1/16 keeps sparse outside columns (the
    failure mode) clear of the cut.
    """
    name = "reconstruct_y"
    instance_type = ThreshInstance

    def __init__(self, c_y: int = 16, threshold: float = 1 / 16):
        if c_y < 1:
            raise UsageError("c_Y must be positive")
        self.c_y = c_y
        self.threshold = threshold

    def split(self, inst):
        return {"r": inst.r}, [inst.matrix[i].copy() for i in range(inst.k)]

    def round_scale(self, inst):
        return inst.r

    def samples(self, r: int) -> int:
        return self.c_y * max(1, _clog2(r))

    def program(self, ctx):
        r = ctx.public["r"]
        row = ctx.input
        if ctx.site != 0:
            got = yield from ctx.wait_for([0])
            for q in got[0]:
                ctx.send(0, UInt(int(row[q.value]), 1))
            return
        t = self.samples(r)
        picks = ctx.rng.integers(0, ctx.k, size=(r, t))
        sums = [0] * r
        asked: dict = {}
        for j in range(r):
            for site in picks[j]:
                site = int(site)
                if site == 0:
                    sums[j] += int(row[j])
                else:
                    ctx.send(site, UInt(j, r - 1))
                    asked.setdefault(site, []).append(j)
        got = yield from ctx.wait_for(sorted(asked))
        for site, cols in asked.items():
            for j, reply in zip(cols, got[site]):
                sums[j] += reply.value
        return ElementSet(tuple(j + 1 for j in range(r) if sums[j] < self.threshold * t))


# ---------------------------------------------------------------------------
# additive-2 diameter spanner


def _all_pairs_diameter(n: int, edges):
    adj = _adjacency(edges)
    best = 0
    for s in range(1, n + 1):
        dist = {s: 0}
        q = deque([s])
        while q:
            x = q.popleft()
            for y in adj.get(x, ()):
                if y not in dist:
                    dist[y] = dist[x] + 1
                    q.append(y)
        if len(dist) < n:
            return math.inf
        best = max(best, max(dist.values()))
    return best


class DiameterAdditive2(_GraphProtocol):
    """Spanner-based diameter estimate with additive error at most 2 (w.h.p.).

    1. Connectivity via shipped forests; disconnected -> Diameter(inf).
    2. P_1 samples s = min(n, ceil(c_s sqrt(n) log2 n)) roots and grows all
       BFS trees concurrently; the tree edges join the spanner.
    3. Light set H = {v : deg(v) <= 2 sqrt(n)}.  Without duplication sites
       report local degree vectors and P_1 sums them.  With duplication
       sites flag vertices whose local degree already exceeds 2 sqrt(n); the
       remaining candidates get their incident edges shipped so P_1 counts
       distinct neighbours exactly.
    4. All edges incident to H join the spanner; P_1 returns its diameter.
    """
    name = "diameter_additive2"

    def __init__(self, c_s: float = 3.0):
        self.c_s = c_s

    def public(self, inst):
        n = inst.n
        s = min(n, max(1, math.ceil(self.c_s * math.sqrt(n) * math.log2(n)))) if n > 1 else 1
        return {"n": n, "s": s, "dup": inst.allow_duplication}

    def program(self, ctx):
        n, s, dup = ctx.public["n"], ctx.public["s"], ctx.public["dup"]
        limit = 2 * math.sqrt(n)
        adj = _adjacency(ctx.input)
        all_cap = n * (n - 1) // 2
        if ctx.site != 0:
            _ship_forest(ctx, n)
            yield from _bfs_sites(ctx, adj, n, s)
            if dup:
                ctx.send(0, BitVector([len(adj.get(v, ())) > limit for v in range(1, n + 1)]))
            else:
                ctx.send(0, Composite([UInt(len(adj.get(v, ())), n - 1) for v in range(1, n + 1)]))
            got = yield from ctx.wait_for([0])
            marked = got[0][0].data
            incident = [(u, v) for u, v in ctx.input if marked[u - 1] or marked[v - 1]]
            ctx.send(0, EdgeList(incident, n, all_cap))
            return

        dsu = yield from _collect_forests(ctx, n)
        if len(_components(dsu, n)) > 1:
            return Diameter(math.inf)
        roots = sorted(int(x) + 1 for x in ctx.rng.choice(n, size=s, replace=False))
        trees = yield from _bfs_p1(ctx, adj, n, [[r] for r in roots])
        spanner = {(min(p, c), max(p, c)) for t in trees for c, p in t.parent.items()}

        got = yield from ctx.wait_for(range(1, ctx.k))
        if dup:
            heavy = [len(adj.get(v, ())) > limit for v in range(1, n + 1)]
            for ps in got.values():
                for p in ps:
                    heavy = [a or b for a, b in zip(heavy, p.data)]
            marked = [not h for h in heavy]
        else:
            deg = [len(adj.get(v, ())) for v in range(1, n + 1)]
            for ps in got.values():
                for p in ps:
                    deg = [a + b.value for a, b in zip(deg, p.parts)]
            marked = [d <= limit for d in deg]
        ctx.broadcast(BitVector(marked))
        incident = {(u, v) for u, v in ctx.input if marked[u - 1] or marked[v - 1]}
        got = yield from ctx.wait_for(range(1, ctx.k))
        for ps in got.values():
            for p in ps:
                incident.update(p.edges)
        if dup:
            # candidates had every incident edge shipped: count distinct neighbours
            nbrs = [set() for _ in range(n + 1)]
            for u, v in incident:
                nbrs[u].add(v)
                nbrs[v].add(u)
            light = [marked[v - 1] and len(nbrs[v]) <= limit for v in range(1, n + 1)]
        else:
            light = marked
        spanner |= {(u, v) for u, v in incident if light[u - 1] or light[v - 1]}
        return Diameter(_all_pairs_diameter(n, spanner))


# ---------------------------------------------------------------------------
# convenience wrappers


def degree_nodup(inst, v, seed=0, **kw):
    return run_protocol(DegreeNoDup(v), inst, seed, **kw)


def degree_dup(inst, v, seed=0, **kw):
    return run_protocol(DegreeDup(v), inst, seed, **kw)


def cycle_free_nodup(inst, seed=0, **kw):
    return run_protocol(CycleFreeNoDup(), inst, seed, **kw)


def cycle_free_dup(inst, seed=0, **kw):
    return run_protocol(CycleFreeDup(), inst, seed, **kw)


def connectivity(inst, seed=0, **kw):
    return run_protocol(Connectivity(), inst, seed, **kw)


def num_cc(inst, seed=0, **kw):
    return run_protocol(NumCC(), inst, seed, **kw)


def bfs_tree(inst, root, seed=0, **kw):
    return run_protocol(BfsTree(root), inst, seed, **kw)


def bipartiteness(inst, seed=0, **kw):
    return run_protocol(Bipartiteness(), inst, seed, **kw)


def triangle_free(inst, seed=0, **kw):
    return run_protocol(TriangleFree(), inst, seed, **kw)


def reconstruct_y(inst, c_y=16, seed=0, **kw):
    return run_protocol(ReconstructY(c_y), inst, seed, **kw)


def diameter_additive2(inst, seed=0, c_s=3.0, **kw):
    return run_protocol(DiameterAdditive2(c_s), inst, seed, **kw)
