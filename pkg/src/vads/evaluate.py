"""Recall / approximation-ratio experiment harness.

``run_sweep`` evaluates a grid of (dataset size n, queue fraction p) cells:
for each n it generates the instance once, builds the index ``repeats`` times
with derived seeds, and searches from the centroid-nearest vertex with
L = ceil(p * n). Results are written as a long-format CSV, per-metric pivoted
CSV + PGM heatmaps, rendered PNG figures, and a JSON summary.
"""

from __future__ import annotations

import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .construct import BuildParams, build_fast, build_slow
from .dataset import distance, medoid
from .errors import DegenerateQueryError
from .instances import InstanceFamily, InstanceSpec, generate
from .search import SearchParams, greedy_search, top_k

__all__ = [
    "DEFAULT_L_FRACTIONS",
    "FAST_SWEEP_SIZES",
    "SLOW_SWEEP_SIZES",
    "SweepConfig",
    "CellResult",
    "SweepResult",
    "recall_at_k",
    "approx_ratio",
    "run_sweep",
    "emit_heatmap",
    "render_heatmap_png",
    "write_results_csv",
]

logger = logging.getLogger(__name__)

# Queue-length fractions p with L = ceil(p*n): 1%..12%, then 15/18/20/30/40/50%.
DEFAULT_L_FRACTIONS = tuple([i / 100 for i in range(1, 13)] + [0.15, 0.18, 0.20, 0.30, 0.40, 0.50])

# Desk-scale default size grids; larger sizes work but get a runtime warning.
FAST_SWEEP_SIZES = tuple(10_000 * i for i in range(1, 21))
SLOW_SWEEP_SIZES = tuple(1_000 * i for i in range(1, 21))
FAST_SIZE_SOFT_CAP = 200_000
SLOW_SIZE_SOFT_CAP = 20_000

RESULTS_CSV_HEADER = "n,l_fraction,L,recall_at_k,avg_approx_ratio,mean_steps_to_first_topk,mean_scanned,repeats"


def recall_at_k(returned, truth, k: int) -> float:
    """Fraction of the true top-k present among the first k returned."""
    if k < 1:
        raise ValueError("k must be >= 1")
    truth = [int(t) for t in truth]
    if len(truth) < k:
        raise ValueError(f"need at least k={k} truth entries, got {len(truth)}")
    got = set(int(r) for r in list(returned)[:k])
    return len(got & set(truth[:k])) / k


def approx_ratio(returned_top1_dist: float, true_nn_dist: float) -> float:
    """Distance ratio of the returned answer to the true nearest neighbor.

    Clamped below at 1 to absorb float rounding on exact hits.
    """
    if true_nn_dist <= 0.0:
        raise DegenerateQueryError("true nearest-neighbor distance is 0; ratio undefined")
    return max(1.0, returned_top1_dist / true_nn_dist)


@dataclass(frozen=True)
class SweepConfig:
    """Grid definition for ``run_sweep``.

    ``mode`` selects the builder; ``build`` carries alpha / r / l_build, whose
    seed field is ignored (per-cell seeds derive from ``seed``).
    """

    family: InstanceFamily
    sizes: tuple = FAST_SWEEP_SIZES
    l_fractions: tuple = DEFAULT_L_FRACTIONS
    k: int = 5
    repeats: int = 1
    mode: str = "fast"
    build: BuildParams = field(default_factory=lambda: BuildParams(alpha=2.0, r=70, l_build=125))
    seed: int = 0
    scale: float = 1.0
    answer_gap: float | None = None

    def __post_init__(self):
        if not self.sizes:
            raise ValueError("sizes must be nonempty")
        if any(not 0.0 < f <= 1.0 for f in self.l_fractions):
            raise ValueError("l_fractions must lie in (0, 1]")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.mode not in ("fast", "slow"):
            raise ValueError("mode must be 'fast' or 'slow'")
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass
class CellResult:
    n: int
    l_fraction: float
    l: int
    recall_at_k: float
    avg_approx_ratio: float
    mean_steps_to_first_topk: float
    mean_scanned: float
    repeats: int


@dataclass
class SweepResult:
    cells: list
    failures: list
    config: dict
    wall_seconds: float
    monotonicity_violations: list = field(default_factory=list)


def _cell_seed(base: int, n: int, repeat: int) -> int:
    ss = np.random.SeedSequence(entropy=base, spawn_key=(n, repeat))
    return int(ss.generate_state(1)[0])


def _evaluate_size(cfg: SweepConfig, n: int) -> tuple[list, list]:
    """All cells for one dataset size: build ``repeats`` graphs, search each
    at every queue fraction, and average per fraction."""
    cells: list[CellResult] = []
    failures: list[dict] = []
    spec = InstanceSpec(
        family=cfg.family,
        n=n,
        alpha=cfg.build.alpha,
        scale=cfg.scale,
        answer_gap=cfg.answer_gap,
        seed=cfg.seed,
    )
    inst = generate(spec)
    ds = inst.dataset
    start = medoid(ds)
    queries = inst.queries
    truths = inst.ground_truth
    true_nn_dist = [distance(q, ds.points[int(t[0])], ds.metric) for q, t in zip(queries, truths)]
    per_fraction: dict[float, list[dict]] = {f: [] for f in cfg.l_fractions}
    for rep in range(cfg.repeats):
        seed = _cell_seed(cfg.seed, n, rep)
        params = BuildParams(
            alpha=cfg.build.alpha, r=cfg.build.r, l_build=cfg.build.l_build, seed=seed
        )
        try:
            if cfg.mode == "fast":
                g = build_fast(ds, params)
            else:
                g = build_slow(ds, params, max_n=None)
        except Exception as exc:  # noqa: BLE001 - recorded, sweep continues
            failures.append({"n": n, "repeat": rep, "stage": "build", "error": repr(exc)})
            continue
        for frac in cfg.l_fractions:
            L = max(1, math.ceil(frac * inst.n))
            try:
                recs, ratios, steps, scanned = [], [], [], []
                for qi, q in enumerate(queries):
                    tr = greedy_search(ds, g, start, q, SearchParams(l=L, k=cfg.k))
                    kk = min(cfg.k, tr.num_scanned)
                    returned = [i for i, _ in top_k(tr, kk)]
                    recs.append(recall_at_k(returned, truths[qi], cfg.k))
                    ratios.append(approx_ratio(tr.result_distances[0], true_nn_dist[qi]))
                    steps.append(tr.steps_to_first_topk(truths[qi][: cfg.k]))
                    scanned.append(tr.num_scanned)
                per_fraction[frac].append(
                    {
                        "recall": float(np.mean(recs)),
                        "ratio": float(np.mean(ratios)),
                        "steps": float(np.mean(steps)),
                        "scanned": float(np.mean(scanned)),
                    }
                )
            except Exception as exc:  # noqa: BLE001
                failures.append(
                    {"n": n, "repeat": rep, "l_fraction": frac, "stage": "search", "error": repr(exc)}
                )
    for frac in cfg.l_fractions:
        runs = per_fraction[frac]
        if not runs:
            continue
        cells.append(
            CellResult(
                n=n,
                l_fraction=frac,
                l=max(1, math.ceil(frac * inst.n)),
                recall_at_k=float(np.mean([r["recall"] for r in runs])),
                avg_approx_ratio=float(np.mean([r["ratio"] for r in runs])),
                mean_steps_to_first_topk=float(np.mean([r["steps"] for r in runs])),
                mean_scanned=float(np.mean([r["scanned"] for r in runs])),
                repeats=len(runs),
            )
        )
    return cells, failures


def _workers_from_env(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("VADS_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning("ignoring non-integer VADS_WORKERS=%r", env)
    return 1


def run_sweep(cfg: SweepConfig, workers: int | None = None) -> SweepResult:
    """Evaluate the whole (sizes x l_fractions) grid.

    Sizes are independent jobs and may run on a thread pool (``workers`` or
    the VADS_WORKERS env var); the output is ordered and seeded per (n,
    repeat), so results are identical regardless of worker count.
    """
    soft_cap = FAST_SIZE_SOFT_CAP if cfg.mode == "fast" else SLOW_SIZE_SOFT_CAP
    for n in cfg.sizes:
        if n > soft_cap:
            logger.warning(
                "size n=%d exceeds the desk-scale default %d for %s builds; expect long runtimes",
                n,
                soft_cap,
                cfg.mode,
            )
    t0 = time.perf_counter()
    nworkers = _workers_from_env(workers)
    cells: list[CellResult] = []
    failures: list[dict] = []
    if nworkers == 1 or len(cfg.sizes) == 1:
        results = [_evaluate_size(cfg, n) for n in cfg.sizes]
    else:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            results = list(pool.map(lambda n: _evaluate_size(cfg, n), cfg.sizes))
    for got_cells, got_failures in results:
        cells.extend(got_cells)
        failures.extend(got_failures)
    cells.sort(key=lambda c: (c.n, c.l_fraction))

    # Recall is expected (not guaranteed) to be monotone in L; log exceptions.
    violations = []
    for n in cfg.sizes:
        col = [c for c in cells if c.n == n]
        for lo, hi in zip(col, col[1:]):
            if hi.recall_at_k < lo.recall_at_k - 1e-12:
                violations.append(
                    {"n": n, "from_fraction": lo.l_fraction, "to_fraction": hi.l_fraction,
                     "from_recall": lo.recall_at_k, "to_recall": hi.recall_at_k}
                )
                logger.warning(
                    "recall non-monotone at n=%d: %.3f@%.2f -> %.3f@%.2f",
                    n, lo.recall_at_k, lo.l_fraction, hi.recall_at_k, hi.l_fraction,
                )
    config_echo = {
        "family": cfg.family.value,
        "sizes": list(cfg.sizes),
        "l_fractions": list(cfg.l_fractions),
        "k": cfg.k,
        "repeats": cfg.repeats,
        "mode": cfg.mode,
        "alpha": cfg.build.alpha,
        "r": cfg.build.r,
        "l_build": cfg.build.l_build,
        "seed": cfg.seed,
        "scale": cfg.scale,
        "answer_gap": cfg.answer_gap,
    }
    return SweepResult(
        cells=cells,
        failures=failures,
        config=config_echo,
        wall_seconds=time.perf_counter() - t0,
        monotonicity_violations=violations,
    )


# -- output emission -----------------------------------------------------------


def _fmt(x: float) -> str:
    if x == math.inf:
        return "inf"
    return repr(float(x))


def write_results_csv(result: SweepResult, path) -> None:
    """Long-format CSV, one row per cell."""
    lines = [RESULTS_CSV_HEADER]
    for c in result.cells:
        lines.append(
            ",".join(
                [
                    str(c.n),
                    _fmt(c.l_fraction),
                    str(c.l),
                    _fmt(c.recall_at_k),
                    _fmt(c.avg_approx_ratio),
                    _fmt(c.mean_steps_to_first_topk),
                    _fmt(c.mean_scanned),
                    str(c.repeats),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def _pivot(cells, metric: str):
    """(grid, fractions desc, sizes asc); missing cells are NaN."""
    sizes = sorted({c.n for c in cells})
    fractions = sorted({c.l_fraction for c in cells}, reverse=True)
    grid = np.full((len(fractions), len(sizes)), np.nan)
    fi = {f: i for i, f in enumerate(fractions)}
    ni = {n: j for j, n in enumerate(sizes)}
    for c in cells:
        grid[fi[c.l_fraction], ni[c.n]] = getattr(c, metric)
    return grid, fractions, sizes


def _metric_to_pixels(grid: np.ndarray, metric: str) -> np.ndarray:
    """Map a metric grid to 8-bit grayscale: recall scales linearly to 255,
    ratios log-scale against the grid maximum."""
    safe = np.nan_to_num(grid, nan=0.0)
    if metric == "recall_at_k":
        return np.clip(np.rint(255.0 * safe), 0, 255).astype(np.uint8)
    top = np.log(max(float(np.max(safe)), 1.0 + 1e-12))
    frac = np.clip(np.log(np.clip(safe, 1.0, None)) / top, 0.0, 1.0)
    return np.rint(255.0 * frac).astype(np.uint8)


def emit_heatmap(cells, path_base, metric: str = "recall_at_k") -> list[str]:
    """Write the pivoted grid as ``<base>.csv`` and ``<base>.pgm``.

    CSV rows run from the largest queue fraction down; columns are sizes
    ascending. The PGM is binary 8-bit grayscale with the same layout.
    Returns the written paths.
    """
    cells = list(cells)
    if not cells:
        raise ValueError("empty result matrix")
    grid, fractions, sizes = _pivot(cells, metric)
    base = str(path_base)
    csv_path = base + ".csv"
    lines = ["l_fraction," + ",".join(str(n) for n in sizes)]
    for f, row in zip(fractions, grid):
        lines.append(_fmt(f) + "," + ",".join(_fmt(v) for v in row))
    Path(csv_path).write_text("\n".join(lines) + "\n")

    pgm_path = base + ".pgm"
    pixels = _metric_to_pixels(grid, metric)
    header = f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n"
    with open(pgm_path, "wb") as f:
        f.write(header.encode("ascii"))
        f.write(pixels.tobytes())
    return [csv_path, pgm_path]


def read_heatmap_csv(path) -> tuple[np.ndarray, list[float], list[int]]:
    """Inverse of the pivoted CSV written by :func:`emit_heatmap`."""
    lines = Path(path).read_text().strip().splitlines()
    sizes = [int(x) for x in lines[0].split(",")[1:]]
    fractions = []
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        fractions.append(float(parts[0]))
        rows.append([float(x) for x in parts[1:]])
    return np.array(rows), fractions, sizes


def render_heatmap_png(cells, path, metric: str = "recall_at_k", title: str | None = None) -> str:
    """Render the grid to a PNG figure alongside the delimited outputs."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    grid, fractions, sizes = _pivot(list(cells), metric)
    fig, ax = plt.subplots(figsize=(7, 5))
    show = grid
    label = metric
    if metric == "avg_approx_ratio":
        show = np.log10(np.clip(np.nan_to_num(grid, nan=1.0), 1.0, None))
        label = "log10(avg approx ratio)"
    im = ax.imshow(show, aspect="auto", cmap="viridis", vmin=0.0)
    ax.set_xticks(range(len(sizes)), [str(n) for n in sizes], rotation=45, ha="right")
    ax.set_yticks(range(len(fractions)), [f"{f:.0%}" for f in fractions])
    ax.set_xlabel("dataset size n")
    ax.set_ylabel("queue length L as fraction of n")
    ax.set_title(title or label)
    fig.colorbar(im, ax=ax, label=label)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def write_summary_json(result: SweepResult, path) -> None:
    payload = {
        "config": result.config,
        "wall_seconds": result.wall_seconds,
        "num_cells": len(result.cells),
        "failures": result.failures,
        "monotonicity_violations": result.monotonicity_violations,
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")
