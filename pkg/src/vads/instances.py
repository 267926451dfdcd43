"""Deterministic generators for the adversarial benchmark instances.

Every generator returns a :class:`GeneratedInstance` bundling the dataset,
its query point(s), oracle-verified ground truth, and a ``meta`` dict that
records the exact layout (index ranges of each region, special vertex ids,
parameters after rounding). The meta dict is what the structural verifiers
and the CLI consume, so its keys are part of the file contract.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .dataset import Dataset, Metric, knn_indices

__all__ = [
    "InstanceFamily",
    "InstanceSpec",
    "GeneratedInstance",
    "gen_line_delta",
    "gen_funnel_alpha",
    "gen_diskann_hard",
    "gen_chain_hard",
    "gen_kdt_hard",
    "apply_ratio_modifier",
    "generate",
]

# Offset of the four satellite points parked next to the answer point.
SATELLITE_OFFSET = 1e-3

# Oracle verification of bundled ground truth is exhaustive up to this size;
# beyond it generators still verify (a single query against n points is cheap)
# but invariant re-checks elsewhere may sample.
ORACLE_ASSERT_CAP = 100_000


class InstanceFamily(Enum):
    LINE_DELTA = "line"
    FUNNEL_ALPHA = "funnel"
    DISKANN_HARD = "diskann-hard"
    CHAIN_HARD = "chain-hard"
    KDT_HARD = "kdt-hard"


@dataclass(frozen=True)
class InstanceSpec:
    """Declarative description of an instance; ``generate`` turns it into data.

    ``n`` is the target size (families round to perfect-square grids and
    report the actual size in meta). For the line family n = 2k.
    """

    family: InstanceFamily
    n: int
    alpha: float = 2.0
    epsilon: float = 0.005
    scale: float = 1.0
    answer_gap: float | None = None
    seed: int = 0


@dataclass
class GeneratedInstance:
    dataset: Dataset
    queries: np.ndarray  # (num_queries, dim)
    ground_truth: list[np.ndarray]  # per query, true top-k indices
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.dataset.n


def _oracle_truth(ds: Dataset, queries: np.ndarray, k: int) -> list[np.ndarray]:
    return [knn_indices(ds, q, k)[0] for q in queries]


def _grid(count_target: int, spacing: float, corner, sx: int, sy: int):
    """Square grid of ~count_target points anchored at ``corner``.

    The grid extends from the corner in direction (sx, sy); point j sits at
    corner + spacing * (sx * (j % side), sy * (j // side)), so index 0 is the
    corner itself. Returns (points, side).
    """
    side = max(1, round(math.sqrt(count_target)))
    idx = np.arange(side * side)
    ix = idx % side
    iy = idx // side
    pts = np.empty((side * side, 2), dtype=np.float64)
    pts[:, 0] = corner[0] + sx * spacing * ix
    pts[:, 1] = corner[1] + sy * spacing * iy
    return pts, side


def gen_line_delta(k: int, alpha: float) -> GeneratedInstance:
    """One-dimensional instance whose aspect ratio grows as alpha^k.

    2k points: the left half at alpha^i, the right half mirrored about the
    midpoint of [0, (2+beta)*alpha^k] with beta = max(1/(alpha-1), alpha-1).
    Queried from both endpoints of that interval.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if alpha <= 1.0:
        raise ValueError("alpha must be > 1")
    beta = max(1.0 / (alpha - 1.0), alpha - 1.0)
    try:
        span = (2.0 + beta) * alpha**k
    except OverflowError:
        span = math.inf
    if not math.isfinite(span) or span > 1e300:
        raise OverflowError(f"alpha^k overflows at alpha={alpha}, k={k}; reduce k")
    i = np.arange(1, 2 * k + 1, dtype=np.float64)
    xs = np.where(
        i <= k,
        alpha**i,
        2.0 * alpha**k + beta * alpha**k - alpha ** (2 * k + 1 - i),
    )
    ds = Dataset(xs[:, None], Metric.L2)
    queries = np.array([[0.0], [span]])
    truth = _oracle_truth(ds, queries, 1)
    assert truth[0][0] == 0 and truth[1][0] == 2 * k - 1
    return GeneratedInstance(
        dataset=ds,
        queries=queries,
        ground_truth=truth,
        meta={
            "family": InstanceFamily.LINE_DELTA.value,
            "n": 2 * k,
            "k": k,
            "alpha": alpha,
            "beta": beta,
            "span": span,
            "gt_k": 1,
        },
    )


def gen_funnel_alpha(n: int, alpha: float, epsilon: float) -> GeneratedInstance:
    """Square grid plus a two-hop detour that pins the approximation ratio.

    The grid (upper-right corner point index 0 at the origin, metric L1) is a
    tiny cluster; the only way out runs through the gateway point, which is
    farther from the query than every grid point, while the answer sits one
    more hop along. Any search that cannot afford to scan the whole grid
    returns the corner, at ratio (2/(alpha-1)+1-eps)/(1+eps).
    """
    if alpha <= 1.0:
        raise ValueError("alpha must be > 1")
    if not 0.0 < epsilon < 0.01:
        raise ValueError("epsilon must lie in (0, 0.01)")
    if epsilon >= 1.0 / (alpha - 1.0):
        raise ValueError("epsilon must be < 1/(alpha-1) or the answer is not the nearest point")
    side = math.isqrt(n)
    if side * side != n:
        warnings.warn(f"n={n} is not a perfect square; rounded down to {side * side}")
    m = side * side
    spacing = 0.5 * epsilon / side
    grid, side = _grid(m, spacing, (0.0, 0.0), -1, -1)
    reach = 2.0 / (alpha - 1.0)
    gateway = np.array([1.0 - epsilon, 1.0 + epsilon])
    answer = np.array([reach + 1.0 - epsilon, 1.0 + epsilon])
    query = np.array([reach + 1.0 - epsilon, 0.0])
    pts = np.vstack([grid, gateway[None, :], answer[None, :]])
    ds = Dataset(pts, Metric.L1)
    queries = query[None, :]
    truth = _oracle_truth(ds, queries, 1)
    assert truth[0][0] == m + 1, "answer point must be the unique nearest neighbor"
    return GeneratedInstance(
        dataset=ds,
        queries=queries,
        ground_truth=truth,
        meta={
            "family": InstanceFamily.FUNNEL_ALPHA.value,
            "n": ds.n,
            "grid_size": m,
            "side": side,
            "spacing": spacing,
            "alpha": alpha,
            "epsilon": epsilon,
            "corner_index": 0,
            "gateway_index": m,
            "a_index": m + 1,
            "grid_range": [0, m],
            "gt_k": 1,
        },
    )


def _satellites(a: np.ndarray) -> np.ndarray:
    off = SATELLITE_OFFSET
    sats = np.tile(a, (4, 1))
    sats[0, 0] -= off
    sats[1, 0] += off
    sats[2, 1] -= off
    sats[3, 1] += off
    return sats


def _hard_layout(n: int, chain_spacing: float | None):
    """Shared geometry of the two 2-D hard instances.

    Three unit-spacing grids M (mass), P (decoy), P' (answer-side), the answer
    point with four satellites, and optionally three connector chains at the
    given spacing. Returns (points, meta) before ground-truth computation.
    """
    if n < 1000:
        raise ValueError("hard instances need n >= 1000")
    ell = 0.01 * n
    m_corner = (-1.2 * ell, 1.2 * ell)
    p_corner = (-ell, 0.0)
    pp_corner = (0.0, ell)
    answer = np.array([0.0, 0.1 * ell])
    query = np.array([-0.4 * ell, 0.0])

    chains = []
    chain_counts = {}
    if chain_spacing is not None:
        d = chain_spacing
        n_diag = round(0.2 * ell / d)
        n_side = round(ell / d)
        i = np.arange(1, n_diag + 1, dtype=np.float64)
        diag = np.stack([m_corner[0] + d * i, m_corner[1] - d * i], axis=1)
        j = np.arange(1, n_side + 1, dtype=np.float64)
        horiz = np.stack([-ell + d * j, np.full(n_side, ell)], axis=1)
        vert = np.stack([np.full(n_side, -ell), ell - d * j], axis=1)
        chains = [diag, horiz, vert]
        chain_counts = {"diagonal": int(n_diag), "horizontal": int(n_side), "vertical": int(n_side)}

    n_chain = sum(c.shape[0] for c in chains)
    budget = n - n_chain - 5
    m_pts, m_side = _grid(round(0.8 * budget), 1.0, m_corner, -1, +1)
    p_pts, p_side = _grid(round(0.1 * budget), 1.0, p_corner, -1, -1)
    pp_pts, pp_side = _grid(round(0.1 * budget), 1.0, pp_corner, +1, +1)
    sats = _satellites(answer)

    blocks = [m_pts, p_pts, pp_pts] + chains + [answer[None, :], sats]
    pts = np.vstack(blocks)

    # Chains touch the grid corners; drop exact coordinate duplicates, keeping
    # the first (grid) occurrence so grid index ranges stay contiguous.
    _, first = np.unique(pts, axis=0, return_index=True)
    keep = np.zeros(pts.shape[0], dtype=bool)
    keep[first] = True
    removed = int((~keep).sum())
    pts = pts[keep]

    sizes = [b.shape[0] for b in blocks]
    starts = np.cumsum([0] + sizes[:-1])
    new_index = np.cumsum(keep) - 1

    def region(block_no: int) -> list[int]:
        lo = starts[block_no]
        hi = lo + sizes[block_no]
        kept = np.nonzero(keep[lo:hi])[0] + lo
        return [int(new_index[kept[0]]), int(new_index[kept[-1]]) + 1]

    meta = {
        "n": int(pts.shape[0]),
        "target_n": n,
        "l": ell,
        "M_range": region(0),
        "P_range": region(1),
        "P_prime_range": region(2),
        "grid_sides": {"M": m_side, "P": p_side, "P_prime": pp_side},
        "a_index": int(new_index[starts[len(blocks) - 2]]),
        "satellite_indices": [int(new_index[starts[len(blocks) - 1] + t]) for t in range(4)],
        "duplicates_removed": removed,
        "gt_k": 5,
    }
    if chain_counts:
        meta["chain_counts"] = chain_counts
        meta["chain_spacing"] = chain_spacing
        meta["chain_ranges"] = {
            name: region(3 + t) for t, name in enumerate(("diagonal", "horizontal", "vertical"))
        }
    return pts, query, meta


def _finish_hard(
    pts: np.ndarray,
    query: np.ndarray,
    meta: dict,
    family: InstanceFamily,
    scale: float,
    answer_gap: float | None,
) -> GeneratedInstance:
    ds = Dataset(pts, Metric.L2)
    queries = query[None, :]
    truth = _oracle_truth(ds, queries, 5)
    expect = {meta["a_index"], *meta["satellite_indices"]}
    assert set(int(t) for t in truth[0]) == expect, "top-5 must be the answer cluster"
    meta["family"] = family.value
    inst = GeneratedInstance(dataset=ds, queries=queries, ground_truth=truth, meta=meta)
    if scale != 1.0 or answer_gap is not None:
        inst = apply_ratio_modifier(inst, scale=scale, answer_gap=answer_gap)
    return inst


def gen_diskann_hard(n: int, scale: float = 1.0, answer_gap: float | None = None) -> GeneratedInstance:
    """Three disconnected unit grids plus an isolated answer cluster.

    80% of the mass sits in a far grid M containing the search entry point;
    the decoy grid P is closest to the query, so bounded-queue search burns
    its budget there before anything can lead to the answer.
    """
    pts, query, meta = _hard_layout(n, chain_spacing=None)
    return _finish_hard(pts, query, meta, InstanceFamily.DISKANN_HARD, scale, answer_gap)


def gen_chain_hard(n: int, scale: float = 1.0, answer_gap: float | None = None) -> GeneratedInstance:
    """The hard layout with connector chains so k-NN-graph builds stay connected.

    Points at spacing 5 run along M's corner to (-l, l), then across to the
    answer-side grid corner and down to the decoy grid corner.
    """
    pts, query, meta = _hard_layout(n, chain_spacing=5.0)
    return _finish_hard(pts, query, meta, InstanceFamily.CHAIN_HARD, scale, answer_gap)


def gen_kdt_hard(n: int, seed: int = 0) -> GeneratedInstance:
    """Six-dimensional variant that also defeats KD-tree entry-point selection.

    The first two coordinates reuse the hard-layout idea at 1e9 scale with a
    long unit-spaced vertical chain as the decoy; coordinates 3-6 separate the
    chain from everything else so variance-split trees descend into it.
    """
    if n < 1000:
        raise ValueError("kdt-hard needs n >= 1000")
    rng = np.random.default_rng(seed)
    big = 1.0e9
    m_pts2, m_side = _grid(round(0.1 * n), 1.0, (-big, big), -1, +1)
    n_chain = round(0.1 * n)
    chain_y = -0.05 * n + np.arange(n_chain, dtype=np.float64)
    chain2 = np.stack([np.full(n_chain, -big), chain_y], axis=1)
    pp_pts2, pp_side = _grid(round(0.8 * n), 1.0, (0.0, big), +1, +1)
    a2 = np.array([0.0, 3.0e8])

    def with_tail(base2: np.ndarray, lo: float, hi: float) -> np.ndarray:
        tail = rng.uniform(lo, hi, size=(base2.shape[0], 4))
        return np.hstack([base2, tail])

    m_pts = with_tail(m_pts2, 5.0e7, 6.0e7)
    chain = with_tail(chain2, 1.0e7, 2.0e7)
    pp_pts = with_tail(pp_pts2, 5.0e7, 6.0e7)
    a = np.concatenate([a2, rng.uniform(5.0e7, 6.0e7, size=4)])
    pts = np.vstack([m_pts, chain, pp_pts, a[None, :]])
    query = np.concatenate([np.array([-3.0e8, 0.0]), np.zeros(4)])

    ds = Dataset(pts, Metric.L2)
    queries = query[None, :]
    truth = _oracle_truth(ds, queries, 5)
    a_index = pts.shape[0] - 1
    assert truth[0][0] == a_index, "answer point must be the nearest neighbor"
    nm, nc, npp = m_pts.shape[0], chain.shape[0], pp_pts.shape[0]
    return GeneratedInstance(
        dataset=ds,
        queries=queries,
        ground_truth=truth,
        meta={
            "family": InstanceFamily.KDT_HARD.value,
            "n": ds.n,
            "target_n": n,
            "seed": seed,
            "M_range": [0, nm],
            "P_range": [nm, nm + nc],
            "P_prime_range": [nm + nc, nm + nc + npp],
            "grid_sides": {"M": m_side, "P_prime": pp_side},
            "chain_span": [float(chain_y[0]), float(chain_y[-1])],
            "a_index": a_index,
            "satellite_indices": [],
            "gt_k": 5,
        },
    )


def apply_ratio_modifier(
    inst: GeneratedInstance, scale: float = 1.0, answer_gap: float | None = None
) -> GeneratedInstance:
    """Scale the whole instance and pull the answer cluster toward the query.

    ``answer_gap`` is the desired post-modification distance from the answer
    point to the query; it defaults to 1% of the current distance, which
    amplifies the approximation ratio of any non-answer result by ~100x.
    Ground truth is recomputed from scratch.
    """
    if scale <= 0:
        raise ValueError("scale must be > 0")
    if "a_index" not in inst.meta:
        raise ValueError("instance has no answer point to move")
    if inst.queries.shape[0] != 1:
        raise ValueError("ratio modifier expects a single-query instance")
    pts = inst.dataset.points * scale
    query = inst.queries[0] * scale
    a_idx = int(inst.meta["a_index"])
    a = pts[a_idx].copy()
    d_cur = float(np.linalg.norm(a - query)) if inst.dataset.metric is Metric.L2 else float(
        np.abs(a - query).sum()
    )
    if answer_gap is None:
        answer_gap = 0.01 * d_cur
    if answer_gap <= 0:
        raise ValueError("answer_gap must be > 0")
    # Radial move preserves the metric ray, so the new distance is exact
    # under both L1 and L2.
    new_a = query + (a - query) * (answer_gap / d_cur)
    shift = new_a - a
    pts = pts.copy()
    pts[a_idx] += shift
    for t in inst.meta.get("satellite_indices", []):
        pts[int(t)] += shift
    ds = Dataset(pts, inst.dataset.metric)
    queries = query[None, :]
    k = int(inst.meta.get("gt_k", 5))
    truth = _oracle_truth(ds, queries, k)
    meta = dict(inst.meta)
    meta["scale"] = scale
    meta["answer_gap"] = float(answer_gap)
    return GeneratedInstance(dataset=ds, queries=queries, ground_truth=truth, meta=meta)


def generate(spec: InstanceSpec) -> GeneratedInstance:
    """Build the instance described by ``spec``."""
    fam = spec.family
    if fam is InstanceFamily.LINE_DELTA:
        return gen_line_delta(k=spec.n // 2, alpha=spec.alpha)
    if fam is InstanceFamily.FUNNEL_ALPHA:
        return gen_funnel_alpha(spec.n, spec.alpha, spec.epsilon)
    if fam is InstanceFamily.DISKANN_HARD:
        return gen_diskann_hard(spec.n, scale=spec.scale, answer_gap=spec.answer_gap)
    if fam is InstanceFamily.CHAIN_HARD:
        return gen_chain_hard(spec.n, scale=spec.scale, answer_gap=spec.answer_gap)
    if fam is InstanceFamily.KDT_HARD:
        return gen_kdt_hard(spec.n, seed=spec.seed)
    raise ValueError(f"unknown family {fam}")
