"""Executable structural checks for graphs built over the generated instances.

Each check returns a :class:`CheckReport` that serializes to JSON; the CLI
maps a failed report to a nonzero exit code so the checks can gate CI.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .dataset import Dataset, compute_stats, medoid
from .graph import ProximityGraph, is_strongly_connected_subset
from .instances import GeneratedInstance

__all__ = [
    "CheckReport",
    "check_alpha_shortcut_reachable",
    "check_degree_bound",
    "check_funnel_properties",
    "check_line_properties",
]


@dataclass
class CheckReport:
    check: str
    ok: bool
    details: dict = field(default_factory=dict)

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps({"check": self.check, "ok": self.ok, **self.details}, indent=indent)


def check_alpha_shortcut_reachable(
    ds: Dataset,
    g: ProximityGraph,
    alpha: float,
    tol: float = 0.0,
    max_witnesses: int = 20,
) -> CheckReport:
    """Exhaustive check over all ordered vertex pairs (p, q), p != q.

    Requires for each pair either the edge (p, q) or an out-neighbor p' of p
    with D(p', q) * alpha <= D(p, q). The inequality is non-strict and checked
    with no slack by default; ``tol`` adds absolute forgiveness for
    large-coordinate instances. O(n^2 * max-degree); intended for n <= 5000.
    """
    if alpha < 1.0:
        raise ValueError("alpha must be >= 1")
    if g.n != ds.n:
        raise ValueError("graph and dataset sizes differ")
    adj, deg = g.raw()
    wit, nviol = _kernels.reachability_kernel(
        ds.points, ds.metric.code, adj, deg, float(alpha), float(tol), int(max_witnesses)
    )
    witnesses = [[int(a), int(b)] for a, b in wit[: min(nviol, max_witnesses)]]
    return CheckReport(
        check="reachability",
        ok=nviol == 0,
        details={
            "n": ds.n,
            "alpha": alpha,
            "tol": tol,
            "violations": int(nviol),
            "witnesses": witnesses,
        },
    )


def check_degree_bound(ds: Dataset, g: ProximityGraph, alpha: float | None = None) -> CheckReport:
    """Report max out-degree against log2 of the aspect ratio.

    The degree of a fully-pruned graph should track log(aspect ratio), not n;
    this check reports the trend numbers and never fails on its own.
    """
    stats = compute_stats(ds)
    max_deg = g.max_out_degree()
    log_delta = math.log2(stats.aspect_ratio) if stats.aspect_ratio > 1 else 0.0
    return CheckReport(
        check="degree",
        ok=True,
        details={
            "n": ds.n,
            "alpha": alpha,
            "max_degree": max_deg,
            "aspect_ratio": stats.aspect_ratio,
            "log2_aspect_ratio": log_delta,
            "ratio": (max_deg / log_delta) if log_delta > 0 else math.inf,
        },
    )


def _edge_sets(g: ProximityGraph):
    adj, deg = g.raw()
    return [set(int(t) for t in adj[v, : deg[v]]) for v in range(g.n)]


def check_funnel_properties(inst: GeneratedInstance, g: ProximityGraph, max_witnesses: int = 20) -> CheckReport:
    """Structural properties the funnel instance guarantees after a full build.

    (1) every grid vertex links to the gateway point and not to the answer;
    (2) the subgraph induced by the grid is strongly connected;
    (3) the centroid-nearest vertex (the search entry point) lies in the grid.
    """
    meta = inst.meta
    for key in ("grid_range", "gateway_index", "a_index"):
        if key not in meta:
            raise ValueError(f"instance meta lacks {key!r}; not a funnel instance")
    lo, hi = meta["grid_range"]
    gw = int(meta["gateway_index"])
    a = int(meta["a_index"])
    adj, deg = g.raw()
    bad_gateway = []
    bad_answer = []
    for v in range(lo, hi):
        out = set(int(t) for t in adj[v, : deg[v]])
        if gw not in out:
            bad_gateway.append(v)
        if a in out:
            bad_answer.append(v)
    p1 = not bad_gateway and not bad_answer
    p2 = is_strongly_connected_subset(g, range(lo, hi))
    entry = medoid(inst.dataset)
    p3 = lo <= entry < hi
    return CheckReport(
        check="funnel-structure",
        ok=p1 and p2 and p3,
        details={
            "grid_links_gateway_not_answer": p1,
            "grid_strongly_connected": p2,
            "entry_point_in_grid": p3,
            "entry_point": int(entry),
            "missing_gateway_edges": bad_gateway[:max_witnesses],
            "forbidden_answer_edges": bad_answer[:max_witnesses],
        },
    )


def check_line_properties(inst: GeneratedInstance, g: ProximityGraph, max_witnesses: int = 20) -> CheckReport:
    """Edge structure of the 1-D exponential line after a full build.

    With 0-based indices and k = n/2: every right-half vertex links to vertex
    k-1 and to nothing left of it; each left-half vertex's only left edge goes
    to its immediate predecessor. The mirrored statements hold on the other
    side. Together these force greedy search into a single long descent.
    """
    meta = inst.meta
    if "k" not in meta:
        raise ValueError("instance meta lacks 'k'; not a line instance")
    k = int(meta["k"])
    n = 2 * k
    if g.n != n:
        raise ValueError("graph size does not match the instance")
    out = _edge_sets(g)
    violations: list[str] = []

    def record(msg: str) -> None:
        if len(violations) < max_witnesses:
            violations.append(msg)

    ok = True
    # Right half vertices i in [k, n): must link to k-1, never left of it.
    for i in range(k, n):
        if (k - 1) not in out[i]:
            ok = False
            record(f"({i}->{k - 1}) missing")
        for j in out[i]:
            if j < k - 1:
                ok = False
                record(f"({i}->{j}) crosses left of {k - 1}")
    # Left half: the only left-neighbor of i is i-1.
    for i in range(1, k):
        if (i - 1) not in out[i]:
            ok = False
            record(f"({i}->{i - 1}) missing")
        for j in out[i]:
            if j < i - 1:
                ok = False
                record(f"({i}->{j}) skips past {i - 1}")
    # Mirror images.
    for i in range(0, k):
        if k not in out[i]:
            ok = False
            record(f"({i}->{k}) missing")
        for j in out[i]:
            if j > k:
                ok = False
                record(f"({i}->{j}) crosses right of {k}")
    for i in range(k, n - 1):
        if (i + 1) not in out[i]:
            ok = False
            record(f"({i}->{i + 1}) missing")
        for j in out[i]:
            if j > i + 1:
                ok = False
                record(f"({i}->{j}) skips past {i + 1}")
    return CheckReport(
        check="line-structure",
        ok=ok,
        details={"k": k, "n": n, "violations": violations},
    )
