"""Graph-based approximate nearest neighbor toolkit.

Builds Vamana-style pruned proximity graphs (full-quadratic and incremental
variants), runs instrumented bounded-queue greedy search over them, generates
the adversarial datasets that defeat such indexes, verifies the structural
properties those datasets rely on, and sweeps recall / approximation-ratio
grids into CSV, PGM and PNG heatmaps.
"""

from .construct import BuildParams, build_fast, build_slow, robust_prune
from .dataset import (
    Dataset,
    DatasetStats,
    Metric,
    brute_force_knn,
    compute_stats,
    distance,
    medoid,
)
from .errors import (
    DegenerateDatasetError,
    DegenerateQueryError,
    DimensionMismatchError,
    VadsError,
)
from .evaluate import (
    CellResult,
    SweepConfig,
    SweepResult,
    approx_ratio,
    emit_heatmap,
    recall_at_k,
    run_sweep,
)
from .graph import ProximityGraph, is_strongly_connected_subset, new_random_regular
from .instances import (
    GeneratedInstance,
    InstanceFamily,
    InstanceSpec,
    apply_ratio_modifier,
    gen_chain_hard,
    gen_diskann_hard,
    gen_funnel_alpha,
    gen_kdt_hard,
    gen_line_delta,
    generate,
)
from .search import SearchParams, SearchTrace, greedy_search, top_k
from .verify import (
    CheckReport,
    check_alpha_shortcut_reachable,
    check_degree_bound,
    check_funnel_properties,
    check_line_properties,
)

__version__ = "0.1.0"

__all__ = [
    "BuildParams",
    "CellResult",
    "CheckReport",
    "Dataset",
    "DatasetStats",
    "DegenerateDatasetError",
    "DegenerateQueryError",
    "DimensionMismatchError",
    "GeneratedInstance",
    "InstanceFamily",
    "InstanceSpec",
    "Metric",
    "ProximityGraph",
    "SearchParams",
    "SearchTrace",
    "SweepConfig",
    "SweepResult",
    "VadsError",
    "apply_ratio_modifier",
    "approx_ratio",
    "brute_force_knn",
    "build_fast",
    "build_slow",
    "check_alpha_shortcut_reachable",
    "check_degree_bound",
    "check_funnel_properties",
    "check_line_properties",
    "compute_stats",
    "distance",
    "emit_heatmap",
    "gen_chain_hard",
    "gen_diskann_hard",
    "gen_funnel_alpha",
    "gen_kdt_hard",
    "gen_line_delta",
    "generate",
    "greedy_search",
    "is_strongly_connected_subset",
    "medoid",
    "new_random_regular",
    "recall_at_k",
    "robust_prune",
    "run_sweep",
    "top_k",
]
