import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from msgpass.distributions import (random_graph_partition, random_set_family, sample_disj,
                                   sample_or_disj, sample_zeta)
from msgpass.instances import (DisjInstance, GraphPartitionInstance, InstanceParseError,
                               OrDisjInstance, SetFamilyInstance, ThreshInstance, deserialize,
                               dump, from_json, load, serialize, to_json, validate)


def test_element_zero_is_violation():
    v = validate(SetFamilyInstance(5, [[0, 1], [2]]))
    assert v is not None and "below 1" in v.what


def test_element_above_n_is_violation():
    assert "above" in validate(SetFamilyInstance(5, [[6]])).what


def test_unsorted_set_is_violation():
    assert validate(SetFamilyInstance(5, [[3, 2]])) is not None


def test_duplicate_edge_without_dup_is_violation():
    g = GraphPartitionInstance(4, [[(1, 2)], [(1, 2)]], False)
    assert validate(g) is not None
    assert validate(GraphPartitionInstance(4, [[(1, 2)], [(1, 2)]], True)) is None


@pytest.mark.parametrize("edges", [[[(2, 2)]], [[(2, 1)]], [[(1, 9)]], [[(1, 2), (1, 2)]]])
def test_bad_edges(edges):
    assert validate(GraphPartitionInstance(4, edges, True)) is not None


def test_disj_example_ok():
    assert validate(DisjInstance(7, [1, 2], [3, 4])) is None


def test_disj_checks():
    assert validate(DisjInstance(7, [1, 2, 3], [4, 5])) is not None  # size != ell
    assert validate(DisjInstance(8, [1, 2], [3, 4])) is not None     # r mod 4
    # two shared elements
    assert validate(DisjInstance(11, [1, 2, 3], [1, 2, 4])) is not None


def test_ordisj_checks():
    assert validate(OrDisjInstance(7, [[1, 2], [3, 4]], [5, 6])) is None
    assert validate(OrDisjInstance(7, [[5, 6]], [5, 6])) is not None


def test_thresh_theta_range():
    m = np.zeros((2, 7), dtype=bool)
    assert validate(ThreshInstance(m, 5)) is None
    assert validate(ThreshInstance(m, 8)) is not None


def test_zeta_round_trip():
    t = sample_zeta(64, 127, seed=3)
    assert validate(t) is None
    assert deserialize(serialize(t)) == t


def test_graph_round_trip_keeps_edge_order():
    g = GraphPartitionInstance(6, [[(3, 4), (1, 2)], [], [(2, 5), (1, 6)]], False)
    back = deserialize(serialize(g))
    assert [list(es) for es in back.local_edges] == [list(es) for es in g.local_edges]
    assert back == g


def test_truncated_input_is_parse_error():
    data = serialize(sample_zeta(8, 31, seed=1))
    with pytest.raises(InstanceParseError) as e:
        deserialize(data[: len(data) // 2])
    assert e.value.line is not None


@pytest.mark.parametrize("doc,field", [
    ({"type": "sets", "format": 1, "n": 3}, "sets"),
    ({"type": "sets", "format": 1, "n": "3", "k": 1, "sets": [[1]]}, "n"),
    ({"type": "graph", "format": 1, "n": 3, "k": 2, "edges": [[[1, 2]]]}, "k"),
    ({"type": "graph", "format": 1, "n": 3, "k": 1, "edges": [[[1, 2, 3]]]}, "edges"),
    ({"type": "thresh", "format": 1, "k": 1, "r": 3, "theta": 2, "matrix": ["1x1"]}, "matrix"),
    ({"type": "sets", "format": 2, "n": 3, "k": 1, "sets": [[1]]}, "format"),
    ({"type": "bogus", "format": 1}, "type"),
])
def test_parse_errors_name_the_field(doc, field):
    with pytest.raises(InstanceParseError) as e:
        from_json(doc)
    assert e.value.field == field


def test_file_round_trip(tmp_path):
    inst = sample_or_disj(5, 31, seed=2)
    dump(inst, tmp_path / "x.json")
    assert load(tmp_path / "x.json") == inst
    assert json.loads((tmp_path / "x.json").read_text())["format"] == 1


def test_thresh_matrix_is_read_only():
    t = sample_zeta(4, 7, seed=0)
    with pytest.raises(ValueError):
        t.matrix[0, 0] = True


# --- property tests --------------------------------------------------------

seeds = st.integers(0, 2 ** 32)


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 12), st.integers(1, 60), st.booleans())
def test_graph_round_trip(seed, k, n, dup):
    g = random_graph_partition(n, k, p=0.2, dup=dup, seed=seed)
    assert validate(g) is None
    assert deserialize(serialize(g)) == g


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 12), st.integers(1, 60))
def test_set_family_round_trip(seed, k, n):
    s = random_set_family(k, n, 0.3, seed)
    assert validate(s) is None
    assert deserialize(serialize(s)) == s


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from([7, 11, 31, 63]))
def test_disj_round_trip(seed, r):
    d = sample_disj(r, seed=seed)
    assert validate(d) is None
    assert deserialize(serialize(d)) == d


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(2, 30), st.data())
def test_mutations_are_caught(seed, n, data):
    # a valid instance with one corrupted edge must fail validation
    g = random_graph_partition(n, 3, m=min(5, n * (n - 1) // 2), seed=seed)
    local = [list(es) for es in g.local_edges]
    site = data.draw(st.integers(0, 2))
    kind = data.draw(st.sampled_from(["loop", "range", "order", "dup"]))
    if kind == "loop":
        local[site].append((1, 1))
    elif kind == "range":
        local[site].append((1, n + 1))
    elif kind == "order":
        local[site].append((2, 1))
    else:
        if not g.m:
            return
        e = next(e for es in g.local_edges for e in es)
        local[site].append(e)
        local[(site + 1) % 3].append(e)
    assert validate(GraphPartitionInstance(n, local, False)) is not None


def test_to_json_shape():
    d = to_json(GraphPartitionInstance(3, [[(1, 2)], [(2, 3)]], False))
    assert d == {"type": "graph", "format": 1, "k": 2, "n": 3, "m": 2, "dup": False,
                 "edges": [[[1, 2]], [[2, 3]]]}
