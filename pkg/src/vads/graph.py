"""Directed out-adjacency graph over dataset indices.

Adjacency is stored as a padded int32 matrix plus a degree vector so the
compiled build/search kernels can read it without conversion. Out-lists keep
insertion order; the construction and search routines re-sort by distance
where ordering matters.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

__all__ = ["ProximityGraph", "new_random_regular", "is_strongly_connected_subset"]

_INITIAL_CAPACITY = 8


class ProximityGraph:
    """Directed graph on vertices 0..n-1 with optional out-degree limit R.

    Invariants enforced on every mutation: no self-loops, no duplicates within
    an out-list, neighbor indices in range, and out-degree <= R when a limit
    is set.
    """

    def __init__(self, n: int, degree_limit: int | None = None, _capacity: int | None = None):
        if n < 1:
            raise ValueError("graph needs at least one vertex")
        if degree_limit is not None and degree_limit < 1:
            raise ValueError("degree limit must be >= 1")
        self.n = n
        self.degree_limit = degree_limit
        if _capacity is None:
            # One slot of slack beyond R: the fast build transiently overfills
            # a vertex by one edge before re-pruning it.
            _capacity = degree_limit + 1 if degree_limit is not None else _INITIAL_CAPACITY
        self._adj = np.zeros((n, max(1, _capacity)), dtype=np.int32)
        self._deg = np.zeros(n, dtype=np.int32)

    # -- accessors ---------------------------------------------------------

    def out_neighbors(self, v: int) -> np.ndarray:
        self._check_vertex(v)
        return self._adj[v, : self._deg[v]].copy()

    def out_degree(self, v: int) -> int:
        self._check_vertex(v)
        return int(self._deg[v])

    def max_out_degree(self) -> int:
        return int(self._deg.max()) if self.n else 0

    def num_edges(self) -> int:
        return int(self._deg.sum())

    def has_edge(self, u: int, v: int) -> bool:
        self._check_vertex(u)
        self._check_vertex(v)
        return bool(np.any(self._adj[u, : self._deg[u]] == v))

    def degree_histogram(self) -> np.ndarray:
        """Counts of vertices by out-degree, index = degree."""
        return np.bincount(self._deg, minlength=int(self._deg.max(initial=0)) + 1)

    # -- mutators ----------------------------------------------------------

    def set_out_neighbors(self, v: int, nbrs) -> None:
        self._check_vertex(v)
        arr = np.asarray(nbrs, dtype=np.int32).ravel()
        if arr.size and (arr.min() < 0 or arr.max() >= self.n):
            raise ValueError("neighbor index out of range")
        if np.any(arr == v):
            raise ValueError(f"self-loop on vertex {v}")
        if np.unique(arr).size != arr.size:
            raise ValueError("duplicate entries in out-list")
        if self.degree_limit is not None and arr.size > self.degree_limit:
            raise ValueError(f"out-list of size {arr.size} exceeds degree limit {self.degree_limit}")
        self._ensure_capacity(arr.size)
        self._adj[v, : arr.size] = arr
        self._deg[v] = arr.size

    def add_edge(self, u: int, v: int) -> None:
        """Append edge (u, v); a no-op if it already exists."""
        self._check_vertex(u)
        self._check_vertex(v)
        if u == v:
            raise ValueError(f"self-loop on vertex {u}")
        if self.has_edge(u, v):
            return
        d = int(self._deg[u])
        if self.degree_limit is not None and d >= self.degree_limit:
            raise ValueError(f"vertex {u} already at degree limit {self.degree_limit}")
        self._ensure_capacity(d + 1)
        self._adj[u, d] = v
        self._deg[u] = d + 1

    # -- internals ---------------------------------------------------------

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise ValueError(f"vertex {v} out of range [0, {self.n})")

    def _ensure_capacity(self, need: int) -> None:
        cap = self._adj.shape[1]
        if need <= cap:
            return
        new_cap = max(need, 2 * cap)
        grown = np.zeros((self.n, new_cap), dtype=np.int32)
        grown[:, :cap] = self._adj
        self._adj = grown

    def raw(self) -> tuple[np.ndarray, np.ndarray]:
        """(adjacency matrix, degree vector) views for the compiled kernels."""
        return self._adj, self._deg

    # -- conversions and comparison ----------------------------------------

    @classmethod
    def from_out_lists(cls, out_lists, degree_limit: int | None = None) -> "ProximityGraph":
        n = len(out_lists)
        cap = max((len(x) for x in out_lists), default=0)
        if degree_limit is not None:
            cap = max(cap, degree_limit + 1)
        g = cls(n, degree_limit=degree_limit, _capacity=max(1, cap))
        for v, nbrs in enumerate(out_lists):
            g.set_out_neighbors(v, nbrs)
        return g

    def to_out_lists(self) -> list[np.ndarray]:
        return [self.out_neighbors(v) for v in range(self.n)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProximityGraph):
            return NotImplemented
        if self.n != other.n or self.degree_limit != other.degree_limit:
            return False
        if not np.array_equal(self._deg, other._deg):
            return False
        return all(
            np.array_equal(self._adj[v, : self._deg[v]], other._adj[v, : other._deg[v]])
            for v in range(self.n)
        )

    def __repr__(self) -> str:
        return (
            f"ProximityGraph(n={self.n}, edges={self.num_edges()}, "
            f"R={self.degree_limit}, max_deg={self.max_out_degree()})"
        )


def new_random_regular(n: int, r: int, seed) -> ProximityGraph:
    """Directed graph where every vertex gets exactly r distinct random
    out-neighbors (excluding itself), sampled uniformly without replacement.

    Deterministic given the seed (or a pre-seeded Generator).
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if r >= n:
        raise ValueError(f"r={r} must be smaller than n={n}")
    rng = np.random.default_rng(seed)
    g = ProximityGraph(n, degree_limit=r, _capacity=r + 1)
    adj, deg = g.raw()
    small = n - 1 <= 2 * r
    for v in range(n):
        if small:
            others = np.concatenate([np.arange(v), np.arange(v + 1, n)])
            picks = rng.permutation(others)[:r]
        else:
            # First r distinct values of an i.i.d. stream over [0, n-2] is a
            # uniform draw without replacement; remap to skip v itself.
            picks = np.empty(0, dtype=np.int64)
            while picks.size < r:
                draw = rng.integers(0, n - 1, size=2 * r + 8)
                _, first = np.unique(draw, return_index=True)
                distinct = draw[np.sort(first)]
                merged = np.concatenate([picks, distinct])
                _, first = np.unique(merged, return_index=True)
                picks = merged[np.sort(first)][:r]
            picks = picks.copy()
            picks[picks >= v] += 1
        adj[v, :r] = picks
        deg[v] = r
    return g


def is_strongly_connected_subset(g: ProximityGraph, subset) -> bool:
    """True iff the subgraph induced by ``subset`` is strongly connected.

    Only edges with both endpoints inside the subset count.
    """
    sub = np.asarray(sorted(set(int(v) for v in subset)), dtype=np.int64)
    if sub.size == 0:
        raise ValueError("subset must be nonempty")
    if sub.min() < 0 or sub.max() >= g.n:
        raise ValueError("subset vertex out of range")
    if sub.size == 1:
        return True
    local = -np.ones(g.n, dtype=np.int64)
    local[sub] = np.arange(sub.size)
    rows, cols = [], []
    adj, deg = g.raw()
    for v in sub:
        nbrs = adj[v, : deg[v]]
        inside = nbrs[local[nbrs] >= 0]
        rows.extend([local[v]] * inside.size)
        cols.extend(local[inside].tolist())
    mat = csr_matrix(
        (np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(sub.size, sub.size)
    )
    ncomp, _ = connected_components(mat, directed=True, connection="strong")
    return int(ncomp) == 1
