"""Index builders: candidate pruning, full-quadratic build, incremental build."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dataset import Dataset, medoid
from .graph import ProximityGraph, new_random_regular

__all__ = ["BuildParams", "robust_prune", "build_slow", "build_fast", "SLOW_BUILD_DEFAULT_CAP"]

# Quadratic-plus cost: refuse absurd sizes unless the caller opts in.
SLOW_BUILD_DEFAULT_CAP = 20_000


@dataclass(frozen=True)
class BuildParams:
    """Construction parameters.

    alpha must exceed 1 strictly (the pruning analysis degenerates at 1);
    pass ``allow_alpha_one=True`` to experiment with alpha = 1 anyway.
    ``r`` is the out-degree limit; None means unlimited. ``l_build`` is the
    search queue length used by the incremental build.
    """

    alpha: float
    r: int | None = None
    l_build: int | None = None
    seed: int = 0
    allow_alpha_one: bool = False

    def __post_init__(self):
        if self.alpha < 1.0:
            raise ValueError("alpha must be >= 1")
        if self.alpha == 1.0 and not self.allow_alpha_one:
            raise ValueError("alpha must be > 1 (set allow_alpha_one to override)")
        if self.r is not None and self.r < 1:
            raise ValueError("degree limit r must be >= 1")
        if self.l_build is not None and self.l_build < 1:
            raise ValueError("l_build must be >= 1")


def _prepare_candidates(candidates, i: int, n: int) -> np.ndarray:
    cand = np.unique(np.asarray(list(candidates) if not isinstance(candidates, np.ndarray) else candidates, dtype=np.int64))
    if cand.size and (cand[0] < 0 or cand[-1] >= n):
        raise ValueError("candidate index out of range")
    return cand[cand != i].astype(np.int32)


def robust_prune(
    ds: Dataset,
    g: ProximityGraph,
    i: int,
    candidates,
    alpha: float,
    r: int | None = None,
) -> np.ndarray:
    """Replace N_out(i) with the pruned candidate set and return it.

    Candidates are merged with the current out-list of i (and i removed),
    then filtered greedily: the closest survivor is kept, and any remaining
    candidate w with D(kept, w) * alpha <= D(i, w) is dropped; equality drops.
    The result is ordered by increasing distance to i.
    """
    if alpha < 1.0:
        raise ValueError("alpha must be >= 1")
    if not 0 <= i < g.n:
        raise ValueError(f"vertex {i} out of range [0, {g.n})")
    merged = np.concatenate([np.asarray(candidates, dtype=np.int64).ravel(), g.out_neighbors(i)])
    cand = _prepare_candidates(merged, i, g.n)
    result, _ = _kernels.prune_kernel(
        ds.points, ds.metric.code, int(i), cand, float(alpha), int(r) if r else 0
    )
    out = result.astype(np.int64)
    g.set_out_neighbors(i, out)
    return out


def build_slow(
    ds: Dataset,
    params: BuildParams,
    max_n: int | None = SLOW_BUILD_DEFAULT_CAP,
    log_records: list | None = None,
) -> ProximityGraph:
    """Prune every vertex against the full vertex set.

    With no degree limit the resulting graph satisfies the shortcut
    reachability property checked by the verifier module. Deterministic and
    order-independent; cost grows quadratically, hence the size cap
    (pass ``max_n=None`` to lift it).
    """
    if ds.n < 2:
        raise ValueError("build needs at least 2 points")
    if max_n is not None and ds.n > max_n:
        raise ValueError(
            f"dataset size {ds.n} exceeds the slow-build cap {max_n}; "
            "pass max_n=None (CLI: --force-large) to proceed"
        )
    r = int(params.r) if params.r is not None else 0
    t0 = time.perf_counter()
    evals = 0
    out_lists = []
    for i in range(ds.n):
        result, e = _kernels.slow_prune_vertex(
            ds.points, ds.metric.code, i, float(params.alpha), r
        )
        out_lists.append(result.copy())
        evals += int(e)
    g = ProximityGraph.from_out_lists(out_lists, degree_limit=params.r)
    if log_records is not None:
        log_records.append(
            {
                "event": "pass",
                "mode": "slow",
                "pass": 1,
                "seconds": time.perf_counter() - t0,
                "distance_evals": evals,
            }
        )
        log_records.append(_summary_record(g, evals))
    return g


def build_fast(
    ds: Dataset,
    params: BuildParams,
    log_records: list | None = None,
) -> ProximityGraph:
    """Two-pass incremental build seeded by a random regular graph.

    Each pass visits the points in a fresh seeded random order; a point is
    re-linked by pruning the visited list of a search for its own coordinates,
    then back-edges are added and overfull neighbors re-pruned. Deterministic
    given (seed, dataset).
    """
    if params.r is None:
        raise ValueError("fast build requires a degree limit r")
    if params.l_build is None:
        raise ValueError("fast build requires l_build")
    if params.r >= ds.n:
        raise ValueError(f"r={params.r} must be smaller than n={ds.n}")
    rng = np.random.default_rng(params.seed)
    g = new_random_regular(ds.n, params.r, rng)
    s = medoid(ds)
    adj, deg = g.raw()
    total_evals = 0
    for pass_no in (1, 2):
        perm = rng.permutation(ds.n).astype(np.int32)
        t0 = time.perf_counter()
        evals = _kernels.build_fast_pass(
            ds.points,
            ds.metric.code,
            adj,
            deg,
            int(params.r),
            int(params.l_build),
            float(params.alpha),
            int(s),
            perm,
        )
        total_evals += int(evals)
        if log_records is not None:
            log_records.append(
                {
                    "event": "pass",
                    "mode": "fast",
                    "pass": pass_no,
                    "seconds": time.perf_counter() - t0,
                    "distance_evals": int(evals),
                }
            )
    if log_records is not None:
        log_records.append(_summary_record(g, total_evals))
    return g


def _summary_record(g: ProximityGraph, evals: int) -> dict:
    return {
        "event": "summary",
        "n": g.n,
        "edges": g.num_edges(),
        "max_out_degree": g.max_out_degree(),
        "degree_histogram": g.degree_histogram().tolist(),
        "distance_evals": evals,
    }
