"""Points, metrics, the dataset container, and the exact brute-force oracle.

Everything downstream (graph construction, search, evaluation) measures
distances through this module, and ``brute_force_knn`` is the ground truth
that recall numbers are computed against.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DegenerateDatasetError, DimensionMismatchError

__all__ = [
    "Metric",
    "Dataset",
    "DatasetStats",
    "distance",
    "distances_to",
    "compute_stats",
    "brute_force_knn",
    "knn_indices",
    "medoid",
]

# Chunk row count for the O(n^2) pairwise passes; bounds peak memory, not cost.
_PAIRWISE_CHUNK = 1024


class Metric(Enum):
    """Distance metric for a dataset. Values double as the CLI/file spelling."""

    L1 = "l1"
    L2 = "l2"

    @property
    def code(self) -> int:
        """Integer code used by the compiled kernels and the native format."""
        return 1 if self is Metric.L1 else 2

    @classmethod
    def from_code(cls, code: int) -> "Metric":
        if code == 1:
            return cls.L1
        if code == 2:
            return cls.L2
        raise ValueError(f"unknown metric code {code}")

    @classmethod
    def parse(cls, name: str) -> "Metric":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown metric {name!r}; expected 'l1' or 'l2'") from None

    @property
    def cdist_name(self) -> str:
        return "cityblock" if self is Metric.L1 else "euclidean"


def _as_point(p, dim: int | None = None) -> np.ndarray:
    arr = np.ascontiguousarray(p, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"point must be a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point coordinates must be finite")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatchError(f"point has dimension {arr.shape[0]}, expected {dim}")
    return arr


def distance(a, b, metric: Metric) -> float:
    """Exact distance between two points under the given metric."""
    pa = _as_point(a)
    pb = _as_point(b, dim=pa.shape[0])
    diff = pa - pb
    if metric is Metric.L1:
        return float(np.sum(np.abs(diff)))
    return float(np.sqrt(np.sum(diff * diff)))


def distances_to(points: np.ndarray, q, metric: Metric) -> np.ndarray:
    """Distances from every row of ``points`` to the single point ``q``."""
    q = _as_point(q, dim=points.shape[1])
    return cdist(points, q[None, :], metric.cdist_name)[:, 0]


class Dataset:
    """Ordered, immutable set of points under one metric.

    Row index i is the identifier of point i everywhere: in graphs built over
    the dataset, in search traces, and in ground-truth files.
    """

    def __init__(self, points, metric: Metric = Metric.L2):
        arr = np.ascontiguousarray(points, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"points must be a 2-D array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("dataset needs at least one point of dimension >= 1")
        if not np.all(np.isfinite(arr)):
            raise ValueError("dataset coordinates must be finite")
        arr.setflags(write=False)
        self.points = arr
        self.metric = metric

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"Dataset(n={self.n}, dim={self.dim}, metric={self.metric.value})"


@dataclass(frozen=True)
class DatasetStats:
    """Extreme pairwise distances and their ratio."""

    d_max: float
    d_min: float

    @property
    def aspect_ratio(self) -> float:
        return self.d_max / self.d_min


def compute_stats(ds: Dataset) -> DatasetStats:
    """Exact max/min pairwise distances via an exhaustive chunked pass.

    Cost is O(n^2) always; no sampling. Raises on duplicate points because
    the minimum distance (and the aspect ratio) would degenerate to 0.
    """
    if ds.n < 2:
        raise ValueError("stats need at least 2 points")
    pts = ds.points
    name = ds.metric.cdist_name
    d_min = np.inf
    d_max = 0.0
    step = _PAIRWISE_CHUNK
    for i0 in range(0, ds.n, step):
        rows = pts[i0 : i0 + step]
        for j0 in range(i0, ds.n, step):
            cols = pts[j0 : j0 + step]
            d = cdist(rows, cols, name)
            if i0 == j0:
                # Diagonal block: only the strict upper triangle is a real pair.
                iu = np.triu_indices(d.shape[0], k=1, m=d.shape[1])
                if iu[0].size == 0:
                    continue
                vals = d[iu]
            else:
                vals = d
            d_min = min(d_min, float(vals.min()))
            d_max = max(d_max, float(vals.max()))
    if d_min == 0.0:
        raise DegenerateDatasetError("dataset contains duplicate points (closest pair at distance 0)")
    return DatasetStats(d_max=d_max, d_min=d_min)


def knn_indices(ds: Dataset, q, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact k nearest neighbors as (indices, distances) arrays.

    Sorted ascending by distance; exact ties break toward the smaller index,
    so the result is fully deterministic.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > ds.n:
        raise ValueError(f"k={k} exceeds dataset size {ds.n}")
    d = distances_to(ds.points, q, ds.metric)
    order = np.lexsort((np.arange(ds.n), d))[:k]
    return order.astype(np.int64), d[order]


def brute_force_knn(ds: Dataset, q, k: int) -> list[tuple[int, float]]:
    """Exact k nearest neighbors of ``q`` as (index, distance) pairs."""
    idx, dist = knn_indices(ds, q, k)
    return [(int(i), float(x)) for i, x in zip(idx, dist)]


def medoid(ds: Dataset) -> int:
    """Index of the point closest to the coordinate-wise mean of the dataset.

    This is the canonical entry point for greedy search. Ties break toward
    the smaller index.
    """
    centroid = ds.points.mean(axis=0)
    d = distances_to(ds.points, centroid, ds.metric)
    return int(np.argmin(d))
