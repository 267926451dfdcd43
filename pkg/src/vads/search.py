"""Instrumented bounded-queue best-first graph search."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .dataset import Dataset
from .errors import DimensionMismatchError
from .graph import ProximityGraph

__all__ = ["SearchParams", "SearchTrace", "greedy_search", "top_k"]


@dataclass(frozen=True)
class SearchParams:
    """Queue length limit l and number of answers k requested."""

    l: int
    k: int = 1

    def __post_init__(self):
        if self.l < 1:
            raise ValueError("queue length l must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass
class SearchTrace:
    """Record of one search run.

    ``scan_order`` lists vertices in the order they were scanned (expanded);
    ``result_indices`` is the same set re-sorted ascending by distance to the
    query, ties toward the smaller index.
    """

    scan_order: np.ndarray
    scan_distances: np.ndarray
    distance_evals: int
    l: int
    result_indices: np.ndarray = field(repr=False)
    result_distances: np.ndarray = field(repr=False)

    @property
    def num_scanned(self) -> int:
        return int(self.scan_order.shape[0])

    def steps_to_first_topk(self, truth_indices) -> float:
        """1-based position in scan order of the first true top-k vertex.

        Returns ``inf`` when the search terminated without scanning any of
        them. ``truth_indices`` is the true top-k of the query, from the
        brute-force oracle.
        """
        truth = set(int(t) for t in truth_indices)
        for pos, v in enumerate(self.scan_order, start=1):
            if int(v) in truth:
                return float(pos)
        return math.inf

    def result(self) -> list[tuple[int, float]]:
        return [(int(i), float(d)) for i, d in zip(self.result_indices, self.result_distances)]


def greedy_search(ds: Dataset, g: ProximityGraph, s: int, q, params: SearchParams) -> SearchTrace:
    """Best-first search from vertex ``s`` toward query point ``q``.

    The set of vertices seen so far is truncated to the ``params.l`` closest
    after every expansion; the search stops when all retained vertices have
    been scanned. Pure function of its arguments.
    """
    if not 0 <= s < g.n:
        raise ValueError(f"start vertex {s} out of range [0, {g.n})")
    if g.n != ds.n:
        raise ValueError(f"graph has {g.n} vertices but dataset has {ds.n} points")
    q = np.ascontiguousarray(q, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != ds.dim:
        raise DimensionMismatchError(f"query shape {q.shape} does not match dataset dim {ds.dim}")
    adj, deg = g.raw()
    order_buf, dist_buf, nscan, evals = _kernels.greedy_kernel(
        ds.points, ds.metric.code, adj, deg, int(s), q, int(params.l)
    )
    scan_order = order_buf[:nscan].astype(np.int64)
    scan_dists = dist_buf[:nscan].copy()
    by_dist = np.lexsort((scan_order, scan_dists))
    return SearchTrace(
        scan_order=scan_order,
        scan_distances=scan_dists,
        distance_evals=int(evals),
        l=params.l,
        result_indices=scan_order[by_dist],
        result_distances=scan_dists[by_dist],
    )


def top_k(trace: SearchTrace, k: int) -> list[tuple[int, float]]:
    """First k entries of the distance-sorted result."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > trace.num_scanned:
        raise ValueError(f"k={k} exceeds the {trace.num_scanned} scanned vertices")
    return [
        (int(i), float(d))
        for i, d in zip(trace.result_indices[:k], trace.result_distances[:k])
    ]
