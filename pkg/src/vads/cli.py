"""Command-line interface.

Subcommands: gen, build, query, sweep, verify, export. Exit codes: 0 success,
1 verification failure, 2 usage error (argparse default), 3 I/O or file
format error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import io as vio
from .construct import BuildParams, build_fast, build_slow
from .dataset import Dataset, Metric, knn_indices, medoid
from .evaluate import (
    DEFAULT_L_FRACTIONS,
    FAST_SWEEP_SIZES,
    SLOW_SWEEP_SIZES,
    SweepConfig,
    emit_heatmap,
    render_heatmap_png,
    run_sweep,
    write_results_csv,
    write_summary_json,
)
from .instances import InstanceFamily, InstanceSpec, generate
from .search import SearchParams, greedy_search, top_k
from .verify import (
    check_alpha_shortcut_reachable,
    check_degree_bound,
    check_funnel_properties,
    check_line_properties,
)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2
EXIT_IO = 3

# Accepted --check names; the verifier functions are keyed by what they test.
CHECK_ALIASES = {
    "reachability": "reachability",
    "degree": "degree",
    "lemma38": "funnel",
    "funnel": "funnel",
    "lemmaB1": "line",
    "lemmab1": "line",
    "line": "line",
}


def _write_jsonl(path, records) -> None:
    with open(path, "w") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


# -- gen ------------------------------------------------------------------------


def cmd_gen(args) -> int:
    try:
        family = InstanceFamily(args.family)
    except ValueError:
        print(f"error: unknown family {args.family!r}", file=sys.stderr)
        return EXIT_USAGE
    n = args.n
    if family is InstanceFamily.LINE_DELTA:
        if args.k is not None:
            n = 2 * args.k
        elif n is None:
            print("error: line family needs --k or --n", file=sys.stderr)
            return EXIT_USAGE
    elif n is None:
        print("error: --n is required", file=sys.stderr)
        return EXIT_USAGE
    spec = InstanceSpec(
        family=family,
        n=n,
        alpha=args.alpha,
        epsilon=args.eps,
        scale=args.scale,
        answer_gap=args.answer_gap,
        seed=args.seed,
    )
    inst = generate(spec)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    prefix = args.prefix
    ds = inst.dataset
    vio.write_native(outdir / f"{prefix}.vads", ds)
    vio.write_fvecs(outdir / f"{prefix}_base.fvecs", ds.points, warn_downcast=args.downcast_warn)
    vio.write_fvecs(outdir / f"{prefix}_query.fvecs", inst.queries, warn_downcast=args.downcast_warn)
    gt = np.stack([t for t in inst.ground_truth])
    vio.write_ivecs(outdir / f"{prefix}_groundtruth.ivecs", gt)
    meta = dict(inst.meta)
    meta["metric"] = ds.metric.value
    meta["num_queries"] = int(inst.queries.shape[0])
    (outdir / f"{prefix}_meta.json").write_text(json.dumps(_json_safe(meta), indent=2) + "\n")
    print(
        f"generated {family.value}: n={ds.n} dim={ds.dim} metric={ds.metric.value} "
        f"queries={inst.queries.shape[0]} -> {outdir}/{prefix}*"
    )
    return EXIT_OK


# -- build ----------------------------------------------------------------------


def cmd_build(args) -> int:
    ds = vio.read_native(args.dataset)
    params = BuildParams(alpha=args.alpha, r=args.R, l_build=args.L, seed=args.seed)
    log_records: list[dict] = []
    if args.mode == "slow":
        g = build_slow(ds, params, max_n=None if args.force_large else 20_000, log_records=log_records)
    else:
        if args.R is None or args.L is None:
            print("error: fast mode requires --R and --L", file=sys.stderr)
            return EXIT_USAGE
        g = build_fast(ds, params, log_records=log_records)
    vio.write_graph(args.out, g)
    if args.log:
        _write_jsonl(args.log, log_records)
    print(f"built {args.mode} graph: n={g.n} edges={g.num_edges()} max_deg={g.max_out_degree()} -> {args.out}")
    return EXIT_OK


# -- query ----------------------------------------------------------------------


def _load_queries(path) -> np.ndarray:
    p = str(path)
    if p.endswith(".fvecs"):
        return vio.read_fvecs(p)
    if p.endswith(".bin"):
        return vio.read_bin(p)
    return vio.read_native(p).points


def cmd_query(args) -> int:
    ds = vio.read_native(args.dataset)
    g = vio.read_graph(args.graph)
    queries = _load_queries(args.queries)
    s = medoid(ds) if args.start is None else args.start
    params = SearchParams(l=args.L, k=args.k)
    results = []
    metrics_lines = ["query,steps_to_first_topk,scanned,distance_evals,top1_index,top1_dist,true_nn_dist,approx_ratio"]
    trace_records = []
    for qi, q in enumerate(queries):
        tr = greedy_search(ds, g, s, q, params)
        kk = min(args.k, tr.num_scanned)
        answers = top_k(tr, kk)
        results.append([i for i, _ in answers] + [-1] * (args.k - kk))
        truth_idx, truth_dist = knn_indices(ds, q, args.k)
        steps = tr.steps_to_first_topk(truth_idx)
        true_nn = float(truth_dist[0])
        ratio = float(tr.result_distances[0]) / true_nn if true_nn > 0 else float("nan")
        metrics_lines.append(
            f"{qi},{steps if steps != math.inf else 'inf'},{tr.num_scanned},{tr.distance_evals},"
            f"{answers[0][0]},{float(answers[0][1])!r},{true_nn!r},{ratio!r}"
        )
        if args.trace:
            for step, (v, d) in enumerate(zip(tr.scan_order, tr.scan_distances), start=1):
                trace_records.append({"query": qi, "step": step, "vertex": int(v), "distance": float(d)})
    vio.write_ivecs(args.out, np.asarray(results, dtype=np.int64))
    out = Path(args.out)
    metrics_path = out.with_name(out.stem + "_metrics.csv")
    metrics_path.write_text("\n".join(metrics_lines) + "\n")
    if args.trace:
        _write_jsonl(args.trace, trace_records)
    print(f"queried {len(queries)} point(s) with L={args.L}, k={args.k} -> {args.out}, {metrics_path}")
    return EXIT_OK


# -- sweep ----------------------------------------------------------------------


def _parse_kv_config(path) -> dict:
    cfg = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        cfg[key.strip()] = value.strip()
    return cfg


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text: str) -> tuple:
    return tuple(int(x) for x in text.split(",") if x.strip())


def cmd_sweep(args) -> int:
    values: dict = {}
    if args.config:
        values.update(_parse_kv_config(args.config))
    flag_overrides = {
        "family": args.family,
        "sizes": args.sizes,
        "l_fractions": args.l_fractions,
        "k": args.k,
        "repeats": args.repeats,
        "mode": args.mode,
        "alpha": args.alpha,
        "r": args.R,
        "l_build": args.L_build,
        "seed": args.seed,
        "scale": args.scale,
        "answer_gap": args.answer_gap,
    }
    for key, val in flag_overrides.items():
        if val is not None:
            values[key] = val
    if "family" not in values:
        print("error: sweep needs a family (flag or config file)", file=sys.stderr)
        return EXIT_USAGE
    mode = str(values.get("mode", "fast"))
    sizes = values.get("sizes")
    if sizes is None:
        sizes = FAST_SWEEP_SIZES if mode == "fast" else SLOW_SWEEP_SIZES
    elif isinstance(sizes, str):
        sizes = _ints(sizes)
    fractions = values.get("l_fractions", DEFAULT_L_FRACTIONS)
    if isinstance(fractions, str):
        fractions = _floats(fractions)
    r = values.get("r")
    l_build = values.get("l_build")
    answer_gap = values.get("answer_gap")
    cfg = SweepConfig(
        family=InstanceFamily(str(values["family"])),
        sizes=tuple(sizes),
        l_fractions=tuple(fractions),
        k=int(values.get("k", 5)),
        repeats=int(values.get("repeats", 1)),
        mode=mode,
        build=BuildParams(
            alpha=float(values.get("alpha", 2.0)),
            r=int(r) if r not in (None, "", "none") else None,
            l_build=int(l_build) if l_build not in (None, "", "none") else None,
        ),
        seed=int(values.get("seed", 0)),
        scale=float(values.get("scale", 1.0)),
        answer_gap=float(answer_gap) if answer_gap not in (None, "", "none") else None,
    )
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    result = run_sweep(cfg, workers=args.workers)
    write_results_csv(result, outdir / "results.csv")
    written = [str(outdir / "results.csv")]
    for metric, stem in (("recall_at_k", "heatmap_recall"), ("avg_approx_ratio", "heatmap_ratio")):
        written += emit_heatmap(result.cells, outdir / stem, metric=metric)
        written.append(render_heatmap_png(result.cells, outdir / f"{stem}.png", metric=metric))
    write_summary_json(result, outdir / "summary.json")
    written.append(str(outdir / "summary.json"))
    print(f"sweep complete in {result.wall_seconds:.1f}s; wrote:")
    for w in written:
        print(f"  {w}")
    if result.failures:
        print(f"warning: {len(result.failures)} cell(s) failed; see summary.json", file=sys.stderr)
    return EXIT_OK


# -- verify ---------------------------------------------------------------------


def _instance_from_files(dataset_path, meta_path):
    from .instances import GeneratedInstance

    ds = vio.read_native(dataset_path)
    meta = json.loads(Path(meta_path).read_text())
    return GeneratedInstance(dataset=ds, queries=np.zeros((0, ds.dim)), ground_truth=[], meta=meta)


def cmd_verify(args) -> int:
    kind = CHECK_ALIASES.get(args.check)
    if kind is None:
        print(f"error: unknown check {args.check!r}; options: {sorted(set(CHECK_ALIASES))}", file=sys.stderr)
        return EXIT_USAGE
    ds = vio.read_native(args.dataset)
    g = vio.read_graph(args.graph)
    if kind == "reachability":
        report = check_alpha_shortcut_reachable(ds, g, alpha=args.alpha, tol=args.tol)
    elif kind == "degree":
        report = check_degree_bound(ds, g, alpha=args.alpha)
    else:
        if not args.meta:
            print("error: this check needs --meta (instance metadata JSON)", file=sys.stderr)
            return EXIT_USAGE
        inst = _instance_from_files(args.dataset, args.meta)
        if kind == "funnel":
            report = check_funnel_properties(inst, g)
        else:
            report = check_line_properties(inst, g)
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK if report.ok else EXIT_VERIFY_FAIL


# -- export ---------------------------------------------------------------------


def _read_any_dataset(path, metric: Metric) -> Dataset:
    p = str(path)
    if p.endswith(".vads"):
        return vio.read_native(p)
    if p.endswith(".fvecs"):
        return Dataset(vio.read_fvecs(p), metric)
    if p.endswith(".bin"):
        return Dataset(vio.read_bin(p), metric)
    raise ValueError(f"cannot infer input dataset format from {p!r} (.vads/.fvecs/.bin)")


def cmd_export(args) -> int:
    src, dst = str(args.input), str(args.output)
    if src.endswith(".ivecs") or dst.endswith(".ivecs"):
        if not (src.endswith(".ivecs") and dst.endswith(".ivecs")):
            print("error: ivecs converts only to ivecs", file=sys.stderr)
            return EXIT_USAGE
        vio.write_ivecs(dst, vio.read_ivecs(src))
    elif dst.endswith(".vapg") or src.endswith(".vapg"):
        if dst.endswith(".csv"):
            vio.write_adjacency_csv(dst, vio.read_graph(src))
        elif src.endswith(".vapg") and dst.endswith(".vapg"):
            vio.write_graph(dst, vio.read_graph(src))
        else:
            print("error: graph files convert to .vapg or .csv", file=sys.stderr)
            return EXIT_USAGE
    else:
        ds = _read_any_dataset(src, Metric.parse(args.metric))
        if dst.endswith(".vads"):
            vio.write_native(dst, ds)
        elif dst.endswith(".fvecs"):
            vio.write_fvecs(dst, ds.points, warn_downcast=args.downcast_warn)
        elif dst.endswith(".bin"):
            vio.write_bin(dst, ds.points, warn_downcast=args.downcast_warn)
        else:
            print(f"error: cannot infer output format from {dst!r}", file=sys.stderr)
            return EXIT_USAGE
    print(f"exported {src} -> {dst}")
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vads", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an adversarial instance")
    g.add_argument("--family", required=True, choices=[f.value for f in InstanceFamily])
    g.add_argument("--n", type=int, default=None, help="target size")
    g.add_argument("--k", type=int, default=None, help="line family: half point count (n = 2k)")
    g.add_argument("--alpha", type=float, default=2.0)
    g.add_argument("--eps", type=float, default=0.005)
    g.add_argument("--scale", type=float, default=1.0)
    g.add_argument("--answer-gap", type=float, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--prefix", default="instance")
    g.add_argument("--downcast-warn", action="store_true", default=True)
    g.add_argument("--no-downcast-warn", dest="downcast_warn", action="store_false")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("build", help="build a graph index over a dataset")
    b.add_argument("--dataset", required=True, help="native .vads dataset")
    b.add_argument("--mode", required=True, choices=["slow", "fast"])
    b.add_argument("--alpha", type=float, required=True)
    b.add_argument("--R", type=int, default=None, help="degree limit")
    b.add_argument("--L", type=int, default=None, help="build queue length (fast mode)")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--force-large", action="store_true", help="lift the slow-build size cap")
    b.add_argument("--out", required=True, help="output .vapg graph file")
    b.add_argument("--log", default=None, help="JSON-lines build log path")
    b.set_defaults(func=cmd_build)

    q = sub.add_parser("query", help="answer queries with greedy search")
    q.add_argument("--dataset", required=True)
    q.add_argument("--graph", required=True)
    q.add_argument("--queries", required=True, help=".fvecs, .bin or .vads query file")
    q.add_argument("--L", type=int, required=True)
    q.add_argument("--k", type=int, default=1)
    q.add_argument("--start", type=int, default=None, help="start vertex (default: centroid-nearest)")
    q.add_argument("--trace", default=None, help="JSON-lines per-scan trace path")
    q.add_argument("--out", required=True, help="output .ivecs result file")
    q.set_defaults(func=cmd_query)

    s = sub.add_parser("sweep", help="run a (n x L) evaluation sweep")
    s.add_argument("--config", default=None, help="key=value config file; flags override")
    s.add_argument("--family", default=None, choices=[f.value for f in InstanceFamily])
    s.add_argument("--sizes", default=None, help="comma-separated sizes")
    s.add_argument("--l-fractions", dest="l_fractions", default=None, help="comma-separated fractions")
    s.add_argument("--k", type=int, default=None)
    s.add_argument("--repeats", type=int, default=None)
    s.add_argument("--mode", default=None, choices=["slow", "fast"])
    s.add_argument("--alpha", type=float, default=None)
    s.add_argument("--R", type=int, default=None)
    s.add_argument("--L-build", dest="L_build", type=int, default=None)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--scale", type=float, default=None)
    s.add_argument("--answer-gap", type=float, default=None)
    s.add_argument("--workers", type=int, default=None, help="parallel size jobs (env VADS_WORKERS)")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run structural checks against a built graph")
    v.add_argument("--dataset", required=True)
    v.add_argument("--graph", required=True)
    v.add_argument("--check", required=True, help="reachability|degree|lemma38|lemmaB1 (aliases: funnel, line)")
    v.add_argument("--alpha", type=float, default=2.0)
    v.add_argument("--tol", type=float, default=0.0)
    v.add_argument("--meta", default=None, help="instance metadata JSON (funnel/line checks)")
    v.add_argument("--out", default=None, help="write the JSON report here too")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("export", help="convert between dataset/graph formats")
    e.add_argument("input")
    e.add_argument("output")
    e.add_argument("--metric", default="l2", help="metric to attach when importing metric-less formats")
    e.add_argument("--downcast-warn", action="store_true", default=True)
    e.add_argument("--no-downcast-warn", dest="downcast_warn", action="store_false")
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # Malformed file contents surface as ValueError from the readers.
        msg = str(exc)
        if any(tok in msg for tok in ("magic", "malformed", "truncated", "trailing", "empty")):
            print(f"file format error: {msg}", file=sys.stderr)
            return EXIT_IO
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except OverflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
