"""ProximityGraph container, random initialization, and connectivity tests."""

import numpy as np
import pytest

from vads import ProximityGraph, is_strongly_connected_subset, new_random_regular


def test_two_vertex_random_regular_only_option():
    g = new_random_regular(2, 1, seed=0)
    assert g.out_neighbors(0).tolist() == [1]
    assert g.out_neighbors(1).tolist() == [0]


def test_random_regular_degrees_and_no_self_loops():
    g = new_random_regular(100, 5, seed=42)
    for v in range(100):
        nbrs = g.out_neighbors(v)
        assert len(nbrs) == 5
        assert v not in nbrs
        assert len(set(nbrs.tolist())) == 5
        assert nbrs.min() >= 0 and nbrs.max() < 100


def test_random_regular_seed_determinism_and_variation():
    a = new_random_regular(1000, 70, seed=1)
    b = new_random_regular(1000, 70, seed=1)
    c = new_random_regular(1000, 70, seed=2)
    assert a == b
    assert any(
        a.out_neighbors(v).tolist() != c.out_neighbors(v).tolist() for v in range(1000)
    )


def test_random_regular_r_too_large():
    with pytest.raises(ValueError):
        new_random_regular(5, 5, seed=0)


def test_add_edge_idempotent():
    g = ProximityGraph(3)
    g.add_edge(0, 1)
    g.add_edge(0, 1)
    assert g.out_degree(0) == 1


def test_self_loop_rejected():
    g = ProximityGraph(3)
    with pytest.raises(ValueError):
        g.set_out_neighbors(1, [1])
    with pytest.raises(ValueError):
        g.add_edge(2, 2)


def test_duplicate_out_list_rejected():
    g = ProximityGraph(3)
    with pytest.raises(ValueError):
        g.set_out_neighbors(0, [1, 1])


def test_out_of_range_neighbor_rejected():
    g = ProximityGraph(3)
    with pytest.raises(ValueError):
        g.set_out_neighbors(0, [3])
    with pytest.raises(ValueError):
        g.add_edge(0, 7)


def test_empty_graph_max_degree():
    assert ProximityGraph(3).max_out_degree() == 0


def test_degree_limit_enforced():
    g = ProximityGraph(4, degree_limit=2)
    g.set_out_neighbors(0, [1, 2])
    with pytest.raises(ValueError):
        g.set_out_neighbors(0, [1, 2, 3])


def test_out_lists_preserve_insertion_order():
    g = ProximityGraph(5)
    g.set_out_neighbors(0, [3, 1, 4])
    assert g.out_neighbors(0).tolist() == [3, 1, 4]


def test_degree_histogram():
    g = ProximityGraph(4)
    g.set_out_neighbors(0, [1, 2])
    g.set_out_neighbors(1, [0])
    hist = g.degree_histogram()
    assert hist.tolist() == [2, 1, 1]


def test_strongly_connected_singleton():
    g = ProximityGraph(3)
    assert is_strongly_connected_subset(g, [1])


def test_strongly_connected_one_directional_pair():
    g = ProximityGraph(2)
    g.add_edge(0, 1)
    assert not is_strongly_connected_subset(g, [0, 1])
    g.add_edge(1, 0)
    assert is_strongly_connected_subset(g, [0, 1])


def test_strongly_connected_induced_only():
    # 0 -> 2 -> 1 and 1 -> 0: connectivity through vertex 2 must not count
    # when 2 is outside the subset.
    g = ProximityGraph(3)
    g.add_edge(0, 2)
    g.add_edge(2, 1)
    g.add_edge(1, 0)
    assert not is_strongly_connected_subset(g, [0, 1])
    assert is_strongly_connected_subset(g, [0, 1, 2])


def test_from_out_lists_roundtrip_equality():
    lists = [[1, 2], [0], [], [0, 1, 2]]
    g = ProximityGraph.from_out_lists(lists)
    assert [x.tolist() for x in g.to_out_lists()] == [[1, 2], [0], [], [0, 1, 2]]
    h = ProximityGraph.from_out_lists(lists)
    assert g == h
    h.add_edge(2, 0)
    assert g != h
