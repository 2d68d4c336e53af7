"""Hard input distributions and the instance constructors of each reduction.

Conventions: columns/elements are 1-based; a ThreshInstance sampled from
``sample_zeta`` keeps its planted set in ``witness_Y``.  Every free choice a
construction leaves open (matching partners, path order) is lexicographic.
"""
from __future__ import annotations

import math

import numpy as np

from .instances import (DisjInstance, GraphPartitionInstance, OrDisjInstance,
                        SetFamilyInstance, ThreshInstance, canon_edge)
from .kernel import UsageError

DEFAULT_CK = 4.0


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)


def _check_r(r: int) -> int:
    if r % 4 != 3:
        raise UsageError(f"r = {r} is not 3 (mod 4), so (r+1)/4 is not integral")
    if r < 3:
        raise UsageError("r must be at least 3")
    return (r + 1) // 4


def _subset(rng, pool: np.ndarray, size: int) -> np.ndarray:
    # partial Fisher-Yates over pool
    a = pool.copy()
    for i in range(size):
        j = i + int(rng.integers(len(a) - i))
        a[i], a[j] = a[j], a[i]
    return a[:size]


def sample_disj(r: int, beta: float = 0.25, seed: int = 0) -> DisjInstance:
    """One draw from the DISJ distribution with intersection probability ``beta``."""
    ell = _check_r(r)
    if r < 7:
        raise UsageError("r must be at least 7")
    if not 0 < beta <= 0.25:
        raise UsageError("beta must lie in (0, 1/4]")
    rng = _rng(seed)
    universe = np.arange(1, r + 1)
    y = _subset(rng, universe, ell)
    rest = np.setdiff1d(universe, y)
    if rng.random() < beta:
        common = y[int(rng.integers(ell))]
        x = np.append(_subset(rng, rest, ell - 1), common)
        branch = "intersecting"
    else:
        x = _subset(rng, rest, ell)
        branch = "disjoint"
    return DisjInstance(r, x.tolist(), y.tolist(),
                        meta={"distribution": "disj", "seed": int(seed), "beta": beta, "branch": branch})


def _sample_rows(rng, k: int, r: int, ell: int, Y: np.ndarray, beta: float) -> np.ndarray:
    """k x r boolean rows drawn independently from the conditional
    distribution given Y: with prob ``beta`` an ell-subset meeting Y in
    exactly one element, otherwise an ell-subset of the complement of Y."""
    ymask = np.zeros(r, dtype=bool)
    ymask[Y - 1] = True
    rest = np.flatnonzero(~ymask)  # 0-based columns outside Y
    # uniform ell-subsets of `rest` for every row at once: ell smallest of iid keys
    keys = rng.random((k, len(rest)))
    pick = np.argpartition(keys, ell - 1, axis=1)[:, :ell]
    mat = np.zeros((k, r), dtype=bool)
    rows = np.repeat(np.arange(k), ell)
    mat[rows, rest[pick.ravel()]] = True
    hit = rng.random(k) < beta
    for i in np.flatnonzero(hit):
        mat[i] = False
        cols = rest[_subset(rng, np.arange(len(rest)), ell - 1)]
        mat[i, cols] = True
        mat[i, Y[int(rng.integers(len(Y)))] - 1] = True
    return mat


def sample_or_disj(k: int, r: int, seed: int = 0) -> OrDisjInstance:
    ell = _check_r(r)
    if k < 2:
        raise UsageError("OR-DISJ needs k >= 2")
    rng = _rng(seed)
    Y = np.sort(_subset(rng, np.arange(1, r + 1), ell))
    mat = _sample_rows(rng, k, r, ell, Y, 1.0 / k ** 2)
    X = [(np.flatnonzero(row) + 1).tolist() for row in mat]
    return OrDisjInstance(r, X, Y.tolist(), meta={"distribution": "ordisj", "seed": int(seed)})


def coverage(t: ThreshInstance) -> bool:
    """Whether every column outside the witness set holds a 1."""
    if t.witness_Y is None:
        raise UsageError("coverage needs witness_Y")
    live = t.matrix.any(axis=0)
    outside = np.ones(t.r, dtype=bool)
    outside[np.array(t.witness_Y, dtype=int) - 1] = False
    return bool(live[outside].all())


def sample_zeta(k: int, r: int, seed: int = 0, ck: float = DEFAULT_CK) -> ThreshInstance:
    """THRESH instance drawn from zeta: the rows of an OR-DISJ draw, with
    theta = (3r-1)/4.  The planted Y is kept as ``witness_Y``."""
    ell = _check_r(r)
    if k < 2:
        raise UsageError("zeta needs k >= 2")
    rng = _rng(seed)
    Y = np.sort(_subset(rng, np.arange(1, r + 1), ell))
    mat = _sample_rows(rng, k, r, ell, Y, 1.0 / k ** 2)
    meta = {"distribution": "zeta", "seed": int(seed)}
    if k < ck * math.log2(r):
        meta["below_ck_floor"] = True
    t = ThreshInstance(mat, (3 * r - 1) // 4, Y.tolist(), meta)
    t.meta["coverage"] = coverage(t)
    return t


def sample_zeta_conditioned(k: int, r: int, value: int, seed: int = 0, max_tries: int = 100000):
    """Rejection-sample zeta until eval_thresh equals ``value``; returns
    (instance, seed used).  Seeds are derived deterministically from ``seed``."""
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF)
    for _ in range(max_tries):
        s = int(ss.spawn(1)[0].generate_state(1, np.uint64)[0])
        t = sample_zeta(k, r, s)
        if eval_thresh(t) == value:
            return t, s
    raise RuntimeError("rejection sampling did not succeed")


def eval_thresh(t: ThreshInstance) -> int:
    """1 iff more than theta columns contain a 1."""
    return int(int(t.matrix.any(axis=0).sum()) > t.theta)


def _need_y(t: ThreshInstance) -> list:
    if t.witness_Y is None:
        raise UsageError("this construction needs witness_Y")
    return list(t.witness_Y)


def _meta(t, name: str) -> dict:
    meta = {"source": dict(t.meta), "reduction": name}
    if getattr(t, "witness_Y", None) is not None:
        meta["witness_Y"] = list(t.witness_Y)
        meta["coverage"] = coverage(t)
    return meta


# ---------------------------------------------------------------------------
# statistics reductions


def build_f0_instance(t: ThreshInstance) -> SetFamilyInstance:
    """S_i = support of row i over universe [r]."""
    meta = {"source": dict(t.meta), "reduction": "sigma_F"}
    if t.witness_Y is not None:
        meta["witness_Y"] = list(t.witness_Y)
        meta["coverage"] = coverage(t)
    return SetFamilyInstance(t.r, [t.row_support(i) for i in range(t.k)], meta)


def build_linfty_instance(t: ThreshInstance, seed: int = 0) -> tuple[SetFamilyInstance, list]:
    """One repetition of the bit-flip reduction: each site joins R with
    probability 7/8 and sites in R complement their row.  Returns the set
    family and R (0-based site indices)."""
    rng = _rng(seed)
    in_r = rng.random(t.k) < 7 / 8
    flipped = t.matrix ^ in_r[:, None]
    sets = [(np.flatnonzero(row) + 1).tolist() for row in flipped]
    R = np.flatnonzero(in_r).tolist()
    meta = {"source": dict(t.meta), "reduction": "sigma_L", "seed": int(seed)}
    return SetFamilyInstance(t.r, sets, meta), R


def build_degree_instance(inst: SetFamilyInstance) -> GraphPartitionInstance:
    """Star around v_1: site i holds (v_1, v_j) for every j in S_i, j != 1.

    deg(v_1) = F0 - [1 in union of the S_i].
    """
    edges = [[(1, j) for j in s if j != 1] for s in inst.sets]
    return GraphPartitionInstance(inst.n, edges, True, {"reduction": "degree_from_f0"})


# ---------------------------------------------------------------------------
# graph reductions


def build_cycle_2party(d: DisjInstance, h: int | None = None) -> GraphPartitionInstance:
    """Vertices s=1, t=2, v_i=2+i.  Cycle s-t-v_i iff x and y meet."""
    h = d.r if h is None else h
    if h < d.r:
        raise UsageError("h must be at least r")
    s, t = 1, 2
    p1 = sorted([canon_edge(s, 2 + i) for i in d.x] + [(s, t)])
    p2 = sorted(canon_edge(2 + i, t) for i in d.y)
    return GraphPartitionInstance(h + 2, [p1, p2], False,
                                  {"source": dict(d.meta), "reduction": "sigma_C1"})


def build_cycle_k(t: ThreshInstance) -> GraphPartitionInstance:
    """Apex u=1 and v_j=1+j.  Site i holds (u, v_j) for every 1 in row i;
    site 0 also matches Y with the first |Y| columns outside Y."""
    Y = _need_y(t)
    outside = [j for j in range(1, t.r + 1) if j not in set(Y)]
    local = [[(1, 1 + j) for j in t.row_support(i)] for i in range(t.k)]
    matching = [canon_edge(1 + a, 1 + b) for a, b in zip(Y, outside[:len(Y)])]
    local[0] = sorted(set(local[0]) | set(matching))
    return GraphPartitionInstance(t.r + 1, local, True, _meta(t, "sigma_C2"))


def _two_paths(Y, r, v):
    ys = set(Y)
    inside = [j for j in range(1, r + 1) if j in ys]
    outside = [j for j in range(1, r + 1) if j not in ys]
    edges = []
    for path in (inside, outside):
        edges += [canon_edge(v(a), v(b)) for a, b in zip(path, path[1:])]
    return edges


def build_connectivity_nodup(t: ThreshInstance) -> GraphPartitionInstance:
    """u_i = i (1..k), v_j = k+j; connected iff THRESH = 1 under coverage."""
    Y = _need_y(t)
    k = t.k
    local = [[(i + 1, k + j) for j in t.row_support(i)] for i in range(k)]
    local[0] = local[0] + _two_paths(Y, t.r, lambda j: k + j)
    return GraphPartitionInstance(k + t.r, local, False, _meta(t, "sigma_N1"))


def build_connectivity_dup(t: ThreshInstance) -> GraphPartitionInstance:
    """All u_i merged into u=1; v_j = 1+j."""
    Y = _need_y(t)
    local = [[(1, 1 + j) for j in t.row_support(i)] for i in range(t.k)]
    local[0] = local[0] + _two_paths(Y, t.r, lambda j: 1 + j)
    return GraphPartitionInstance(t.r + 1, local, True, _meta(t, "sigma_N2"))


def build_bipartite_nodup(t: ThreshInstance) -> GraphPartitionInstance:
    """a_i = i, b_i = r+i, c_i = 2r+i; bipartite iff THRESH = 0 under coverage."""
    Y = _need_y(t)
    r, k = t.r, t.k
    a, b, c = (lambda i: i), (lambda i: r + i), (lambda i: 2 * r + i)
    local = [[canon_edge(c(i + 1), b(j)) for j in t.row_support(i)] for i in range(k)]
    extra = [canon_edge(a(i), b(i)) for i in range(1, r + 1)]
    extra += [canon_edge(c(i), a(j)) for i in range(1, k + 1) for j in Y]
    local[0] = local[0] + extra
    return GraphPartitionInstance(2 * r + k, local, False, _meta(t, "sigma_B1"))


def build_bipartite_dup(t: ThreshInstance) -> GraphPartitionInstance:
    """a_i = i, b_i = r+i, single apex c = 2r+1."""
    Y = _need_y(t)
    r = t.r
    c = 2 * r + 1
    local = [[canon_edge(c, r + j) for j in t.row_support(i)] for i in range(t.k)]
    extra = [canon_edge(i, r + i) for i in range(1, r + 1)] + [canon_edge(c, j) for j in Y]
    local[0] = local[0] + extra
    return GraphPartitionInstance(2 * r + 1, local, True, _meta(t, "sigma_B2"))


def decode_pair(i: int, n: int) -> tuple[int, int]:
    """(p, q) in [n]^2 with (p-1)*n + q = i."""
    p = -(-i // n)
    return p, i - (p - 1) * n


def _triangle_n(r: int, n: int | None) -> int:
    if n is None:
        n = math.isqrt(r - 1) + 1 if r > 1 else 1
    if r > n * n:
        raise UsageError(f"need r <= n^2, got r={r}, n={n}")
    return n


def build_triangle_2party(d: DisjInstance, n: int | None = None) -> GraphPartitionInstance:
    """a_p = p, b_p = n+p, c_q = 2n+q; triangle-free iff x and y are disjoint."""
    n = _triangle_n(d.r, n)
    a, b, c = (lambda p: p), (lambda p: n + p), (lambda q: 2 * n + q)
    p1 = []
    for i in d.x:
        p, q = decode_pair(i, n)
        p1.append(canon_edge(a(p), c(q)))
    p1 += [canon_edge(a(s), b(s)) for s in range(1, n + 1)]
    p2 = []
    for i in d.y:
        p, q = decode_pair(i, n)
        p2.append(canon_edge(b(p), c(q)))
    return GraphPartitionInstance(3 * n, [p1, p2], False,
                                  {"source": dict(d.meta), "reduction": "sigma_T1"})


def build_triangle_k(t: ThreshInstance, n: int | None = None) -> GraphPartitionInstance:
    """Rows become (a_p, c_q) edges; site 0 adds the a-b matching and
    (b_p, c_q) for every column in Y."""
    Y = _need_y(t)
    n = _triangle_n(t.r, n)
    a, b, c = (lambda p: p), (lambda p: n + p), (lambda q: 2 * n + q)
    local = []
    for i in range(t.k):
        es = []
        for j in t.row_support(i):
            p, q = decode_pair(j, n)
            es.append(canon_edge(a(p), c(q)))
        local.append(es)
    extra = [canon_edge(a(s), b(s)) for s in range(1, n + 1)]
    for j in Y:
        p, q = decode_pair(j, n)
        extra.append(canon_edge(b(p), c(q)))
    local[0] = local[0] + extra
    return GraphPartitionInstance(3 * n, local, True, _meta(t, "sigma_T2"))


# ---------------------------------------------------------------------------
# generic random instances for verification and sweeps


def random_set_family(k: int, n: int, density: float = 0.3, seed: int = 0) -> SetFamilyInstance:
    rng = _rng(seed)
    mat = rng.random((k, n)) < density
    sets = [(np.flatnonzero(row) + 1).tolist() for row in mat]
    return SetFamilyInstance(n, sets, {"distribution": "random_sets", "seed": int(seed)})


def random_graph(n: int, p: float | None = None, m: int | None = None, seed: int = 0) -> list:
    """Edges of G(n, p), or of G(n, m) when ``m`` is given."""
    rng = _rng(seed)
    total = n * (n - 1) // 2
    if m is not None:
        m = min(m, total)
        idx = np.sort(rng.choice(total, size=m, replace=False)) if total else np.array([], int)
    else:
        idx = np.flatnonzero(rng.random(total) < p)
    # unrank pair index -> (u, v) with u < v
    us, vs = np.triu_indices(n, k=1)
    return [(int(us[i]) + 1, int(vs[i]) + 1) for i in idx]


def partition_edges(edges, n: int, k: int, dup: bool = False, seed: int = 0,
                    dup_p: float = 0.3) -> GraphPartitionInstance:
    """Spread ``edges`` over k sites.  Without duplication each edge goes to
    one uniform site; with duplication each edge goes to a uniform site and
    additionally to every other site with probability ``dup_p``."""
    rng = _rng(seed)
    local = [[] for _ in range(k)]
    for e in edges:
        e = canon_edge(*e)
        home = int(rng.integers(k))
        local[home].append(e)
        if dup:
            for i in np.flatnonzero(rng.random(k) < dup_p):
                if i != home:
                    local[int(i)].append(e)
    return GraphPartitionInstance(n, local, dup, {"distribution": "random_graph", "seed": int(seed)})


def random_graph_partition(n: int, k: int, p: float | None = None, m: int | None = None,
                           dup: bool = False, seed: int = 0) -> GraphPartitionInstance:
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF)
    s1, s2 = (int(c.generate_state(1, np.uint64)[0]) for c in ss.spawn(2))
    inst = partition_edges(random_graph(n, p=p, m=m, seed=s1), n, k, dup, s2)
    inst.meta.update({"seed": int(seed), "p": p, "m_target": m})
    return inst
