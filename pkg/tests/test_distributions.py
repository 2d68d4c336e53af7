import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from msgpass import UsageError
from msgpass import distributions as D
from msgpass import oracle as O
from msgpass.instances import DisjInstance, ThreshInstance, validate


def _thresh(rows, theta, Y=None):
    mat = np.array([[c == "1" for c in row] for row in rows], dtype=bool)
    return ThreshInstance(mat, theta, Y)


# --- DISJ ------------------------------------------------------------------

def test_disj_ell():
    d = D.sample_disj(7, seed=1)
    assert d.ell == 2 and len(d.x) == len(d.y) == 2


@pytest.mark.parametrize("r,beta", [(8, 0.25), (3, 0.25), (7, 0.0), (7, 0.3), (10, 0.1)])
def test_disj_bad_parameters(r, beta):
    with pytest.raises(UsageError):
        D.sample_disj(r, beta)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 40), st.sampled_from([7, 11, 15, 31, 127]))
def test_disj_intersection_at_most_one(seed, r):
    d = D.sample_disj(r, seed=seed)
    assert validate(d) is None
    assert len(set(d.x) & set(d.y)) in (0, 1)
    assert (len(set(d.x) & set(d.y)) == 1) == (d.meta["branch"] == "intersecting")


def test_disj_intersection_rate():
    hits = sum(O.oracle_disj(D.sample_disj(31, 0.25, s)) for s in range(100_000))
    assert abs(hits / 100_000 - 0.25) <= 0.01


# --- OR-DISJ and zeta ------------------------------------------------------

@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 40), st.integers(2, 40))
def test_or_disj_rows_avoid_or_touch_y_once(seed, k):
    inst = D.sample_or_disj(k, 31, seed)
    assert validate(inst) is None
    ys = set(inst.Y)
    for x in inst.X:
        assert len(ys & set(x)) in (0, 1)
    assert O.oracle_or_disj(inst) == int(any(ys & set(x) for x in inst.X))


def test_or_disj_positive_rate():
    k = 100
    expected = 1 - (1 - 1 / k ** 2) ** k
    hits = sum(O.oracle_or_disj(D.sample_or_disj(k, 31, s)) for s in range(10_000))
    assert abs(hits / 10_000 - expected) <= 0.003


def test_zeta_theta():
    t = D.sample_zeta(8, 7, seed=0)
    assert t.theta == 5


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 40), st.integers(2, 64), st.sampled_from([7, 31, 127]))
def test_zeta_rows_have_ell_ones(seed, k, r):
    t = D.sample_zeta(k, r, seed)
    assert validate(t) is None
    assert (t.matrix.sum(axis=1) == (r + 1) // 4).all()
    assert t.matrix.any()


def test_zeta_floor_flag():
    assert D.sample_zeta(4, 127, 0).meta.get("below_ck_floor")
    assert not D.sample_zeta(64, 31, 0).meta.get("below_ck_floor")


def test_zeta_coverage_rate():
    ok = sum(D.sample_zeta(64, 31, s).meta["coverage"] for s in range(1000))
    assert ok / 1000 >= 0.99


def test_zeta_conditioned():
    t, s = D.sample_zeta_conditioned(16, 31, 1, seed=5)
    assert D.eval_thresh(t) == 1
    assert D.sample_zeta(16, 31, s) == t


# --- THRESH ----------------------------------------------------------------

def test_eval_thresh_examples():
    assert D.eval_thresh(_thresh(["0000000"] * 3, 5)) == 0
    assert D.eval_thresh(_thresh(["1111111"] * 3, 5)) == 1
    rows = ["1100000", "0010000", "0001100"]
    assert D.eval_thresh(_thresh(rows, 5)) == 0
    assert D.eval_thresh(_thresh(rows + ["0000011"], 5)) == 1


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.integers(1, 12), st.data())
def test_eval_thresh_against_loop(k, r, data):
    rows = [data.draw(st.text("01", min_size=r, max_size=r)) for _ in range(k)]
    theta = data.draw(st.integers(0, r))
    live = sum(1 for j in range(r) if any(row[j] == "1" for row in rows))
    assert D.eval_thresh(_thresh(rows, theta)) == int(live > theta)


# --- builders --------------------------------------------------------------

def test_decode_pair_example():
    assert D.decode_pair(5, 3) == (2, 2)


@given(st.integers(1, 30), st.data())
def test_decode_pair_inverts(n, data):
    i = data.draw(st.integers(1, n * n))
    p, q = D.decode_pair(i, n)
    assert 1 <= p <= n and 1 <= q <= n and (p - 1) * n + q == i


def test_triangle_2party_edge_for_i5():
    d = DisjInstance(7, [1, 5], [2, 3])
    g = D.build_triangle_2party(d, 3)
    # a_2 = 2, c_2 = 2n + 2 = 8
    assert (2, 8) in g.local_edges[0]


def test_builders_need_witness():
    t = _thresh(["1100000", "0011000"], 5)
    for build in (D.build_cycle_k, D.build_connectivity_nodup, D.build_connectivity_dup,
                  D.build_bipartite_nodup, D.build_bipartite_dup, D.build_triangle_k):
        with pytest.raises(UsageError):
            build(t)


def test_connectivity_negative_is_disconnected():
    t, _ = D.sample_zeta_conditioned(64, 127, 0, seed=2)
    assert t.meta["coverage"]
    assert not O.oracle_connected(D.build_connectivity_nodup(t))


def test_bipartite_positive_has_odd_cycle():
    t, _ = D.sample_zeta_conditioned(64, 127, 1, seed=2)
    assert not O.oracle_bipartite(D.build_bipartite_nodup(t))


def test_linfty_flip():
    t = D.sample_zeta(16, 31, seed=4)
    sf, R = D.build_linfty_instance(t, seed=9)
    for i in range(t.k):
        row = set(t.row_support(i))
        if i in R:
            assert set(sf.sets[i]) == set(range(1, 32)) - row
        else:
            assert set(sf.sets[i]) == row


def test_degree_from_f0():
    t = D.sample_zeta(16, 31, seed=4)
    sf = D.build_f0_instance(t)
    g = D.build_degree_instance(sf)
    union = set().union(*map(set, sf.sets))
    assert O.oracle_degree(g, 1) == O.oracle_f0(sf) - (1 in union)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 40))
def test_built_instances_validate(seed):
    t = D.sample_zeta(8, 31, seed)
    d = D.sample_disj(31, seed=seed)
    for inst in (D.build_f0_instance(t), D.build_linfty_instance(t, seed)[0], D.build_cycle_k(t),
                 D.build_connectivity_nodup(t), D.build_connectivity_dup(t),
                 D.build_bipartite_nodup(t), D.build_bipartite_dup(t), D.build_triangle_k(t),
                 D.build_cycle_2party(d), D.build_triangle_2party(d)):
        assert validate(inst) is None, inst.meta


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 40), st.integers(1, 80), st.integers(1, 10), st.booleans())
def test_partition_preserves_edges(seed, n, k, dup):
    edges = D.random_graph(n, p=0.1, seed=seed)
    g = D.partition_edges(edges, n, k, dup=dup, seed=seed + 1)
    assert g.edge_set() == set(edges)
    assert validate(g) is None


def test_random_graph_m():
    assert len(D.random_graph(30, m=40, seed=1)) == 40
