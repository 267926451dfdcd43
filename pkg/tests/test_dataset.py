"""Metric, dataset statistics, brute-force oracle, and medoid tests."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vads import (
    Dataset,
    DegenerateDatasetError,
    DimensionMismatchError,
    Metric,
    brute_force_knn,
    compute_stats,
    distance,
    medoid,
)
from vads.dataset import knn_indices

coord = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


def test_distance_identity():
    assert distance([0, 0], [0, 0], Metric.L2) == 0.0


def test_distance_345_triangle():
    assert distance([0, 0], [3, 4], Metric.L2) == 5.0


def test_distance_l1_coordinate_sum():
    assert distance([0, 0], [3, 4], Metric.L1) == 7.0


def test_distance_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        distance([0, 0], [1, 2, 3], Metric.L2)


def test_distance_rejects_nan():
    with pytest.raises(ValueError):
        distance([0, float("nan")], [0, 0], Metric.L2)


@given(
    st.lists(coord, min_size=3, max_size=3),
    st.lists(coord, min_size=3, max_size=3),
    st.sampled_from([Metric.L1, Metric.L2]),
)
def test_distance_symmetric(a, b, m):
    assert distance(a, b, m) == distance(b, a, m)


@pytest.mark.parametrize("metric", [Metric.L1, Metric.L2])
def test_metric_axioms_on_random_triples(metric):
    rng = np.random.default_rng(7)
    pts = rng.normal(size=(3000, 4))
    for _ in range(1000):
        i, j, k = rng.integers(0, 3000, size=3)
        dij = distance(pts[i], pts[j], metric)
        dji = distance(pts[j], pts[i], metric)
        dik = distance(pts[i], pts[k], metric)
        dkj = distance(pts[k], pts[j], metric)
        assert dij == dji
        assert dij <= (dik + dkj) * (1 + 1e-9)


def test_stats_three_collinear_points():
    ds = Dataset(np.array([[0.0], [1.0], [3.0]]))
    st_ = compute_stats(ds)
    assert st_.d_min == 1.0
    assert st_.d_max == 3.0
    assert st_.aspect_ratio == 3.0


def test_stats_single_pair():
    ds = Dataset(np.array([[0.0], [1.0]]))
    assert compute_stats(ds).aspect_ratio == 1.0


def test_stats_exponential_line_by_hand():
    # Points {2, 4, 8, 10}: the 6 pairwise distances are 2,6,8,4,6,2.
    ds = Dataset(np.array([[2.0], [4.0], [8.0], [10.0]]))
    st_ = compute_stats(ds)
    assert st_.d_min == 2.0
    assert st_.d_max == 8.0
    assert st_.aspect_ratio == 4.0


def test_stats_duplicate_points_error():
    ds = Dataset(np.array([[1.0, 2.0], [1.0, 2.0], [3.0, 4.0]]))
    with pytest.raises(DegenerateDatasetError):
        compute_stats(ds)


@pytest.mark.parametrize("metric", [Metric.L1, Metric.L2])
@pytest.mark.parametrize("n,dim", [(50, 1), (333, 3), (1500, 2)])
def test_stats_agree_with_quadratic_pass(metric, n, dim):
    rng = np.random.default_rng(n * dim)
    ds = Dataset(rng.normal(size=(n, dim)), metric)
    st_ = compute_stats(ds)
    # Independent O(n^2) plain-python pass.
    d_min, d_max = math.inf, 0.0
    pts = ds.points
    for i in range(n):
        for j in range(i + 1, n):
            d = distance(pts[i], pts[j], metric)
            d_min = min(d_min, d)
            d_max = max(d_max, d)
    assert st_.d_min == pytest.approx(d_min, rel=1e-12)
    assert st_.d_max == pytest.approx(d_max, rel=1e-12)


def test_knn_nearest_by_inspection():
    ds = Dataset(np.array([[0.0, 0.0], [1.0, 0.0], [5.0, 0.0]]))
    out = brute_force_knn(ds, [0.9, 0.0], 1)
    assert out[0][0] == 1
    assert out[0][1] == pytest.approx(0.1)


def test_knn_full_sort():
    ds = Dataset(np.array([[0.0, 0.0], [1.0, 0.0], [5.0, 0.0]]))
    out = brute_force_knn(ds, [0.9, 0.0], 3)
    assert [i for i, _ in out] == [1, 0, 2]
    assert [d for _, d in out] == pytest.approx([0.1, 0.9, 4.1])


def test_knn_k_too_large():
    ds = Dataset(np.zeros((3, 2)))
    with pytest.raises(ValueError):
        brute_force_knn(ds, [0.0, 0.0], 4)


def test_knn_tie_breaks_by_smaller_index():
    ds = Dataset(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]]))
    out = brute_force_knn(ds, [0.0, 0.0], 3)
    assert [i for i, _ in out] == [0, 1, 2]


def test_knn_distances_nondecreasing_and_bounding():
    rng = np.random.default_rng(3)
    ds = Dataset(rng.normal(size=(200, 3)), Metric.L2)
    q = rng.normal(size=3)
    idx, dist = knn_indices(ds, q, 20)
    assert np.all(np.diff(dist) >= 0)
    # The k-th distance lower-bounds every index not returned.
    excluded = np.setdiff1d(np.arange(200), idx)
    from vads.dataset import distances_to

    rest = distances_to(ds.points, q, ds.metric)[excluded]
    assert np.all(rest >= dist[-1])


def test_medoid_symmetric_layout():
    ds = Dataset(np.array([[0.0, 0.0], [10.0, 0.0], [5.0, 0.0]]))
    assert medoid(ds) == 2


def test_medoid_singleton():
    assert medoid(Dataset(np.zeros((1, 2)))) == 0


def test_dataset_rejects_empty_and_nonfinite():
    with pytest.raises(ValueError):
        Dataset(np.zeros((0, 2)))
    with pytest.raises(ValueError):
        Dataset(np.array([[np.inf, 0.0]]))


def test_dataset_points_immutable():
    ds = Dataset(np.ones((2, 2)))
    with pytest.raises(ValueError):
        ds.points[0, 0] = 5.0
