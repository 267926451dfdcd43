"""Recall/ratio metrics, sweep harness, and heatmap emission tests."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vads import (
    BuildParams,
    CellResult,
    DegenerateQueryError,
    InstanceFamily,
    SweepConfig,
    approx_ratio,
    emit_heatmap,
    recall_at_k,
    run_sweep,
)
from vads.evaluate import (
    DEFAULT_L_FRACTIONS,
    read_heatmap_csv,
    render_heatmap_png,
    write_results_csv,
)


def test_recall_identical_lists():
    assert recall_at_k([1, 2, 3, 4, 5], [1, 2, 3, 4, 5], 5) == 1.0


def test_recall_disjoint():
    assert recall_at_k([6, 7, 8, 9, 10], [1, 2, 3, 4, 5], 5) == 0.0


def test_recall_partial_overlap():
    assert recall_at_k([1, 2, 3, 9, 10], [1, 2, 3, 4, 5], 5) == 0.6


def test_recall_needs_enough_truth():
    with pytest.raises(ValueError):
        recall_at_k([1], [1, 2], 5)


@given(st.lists(st.integers(0, 30), min_size=5, max_size=5, unique=True),
       st.lists(st.integers(0, 30), min_size=5, max_size=5, unique=True))
def test_recall_bounds(returned, truth):
    r = recall_at_k(returned, truth, 5)
    assert 0.0 <= r <= 1.0
    assert r * 5 == int(r * 5 + 0.5)  # multiples of 1/k


def test_approx_ratio_cases():
    assert approx_ratio(1.0, 1.0) == 1.0
    assert approx_ratio(3.0, 1.5) == 2.0
    assert approx_ratio(0.999999999, 1.0) == 1.0  # clamped
    with pytest.raises(DegenerateQueryError):
        approx_ratio(1.0, 0.0)


def test_default_fraction_grid():
    # 1%..12% then 15, 18, 20, 30, 40, 50%.
    assert len(DEFAULT_L_FRACTIONS) == 18
    assert DEFAULT_L_FRACTIONS[0] == 0.01
    assert DEFAULT_L_FRACTIONS[11] == 0.12
    assert DEFAULT_L_FRACTIONS[-1] == 0.50


def test_sweep_config_validation():
    ok = SweepConfig(family=InstanceFamily.FUNNEL_ALPHA, sizes=(100,), l_fractions=(0.5,))
    assert ok.k == 5
    with pytest.raises(ValueError):
        SweepConfig(family=InstanceFamily.FUNNEL_ALPHA, sizes=(100,), l_fractions=(0.0,))
    with pytest.raises(ValueError):
        SweepConfig(family=InstanceFamily.FUNNEL_ALPHA, sizes=(100,), repeats=0)
    with pytest.raises(ValueError):
        SweepConfig(family=InstanceFamily.FUNNEL_ALPHA, sizes=(100,), mode="medium")


def _tiny_config(**kw):
    base = dict(
        family=InstanceFamily.DISKANN_HARD,
        sizes=(1000, 2000),
        l_fractions=(0.05, 0.3),
        k=5,
        repeats=2,
        mode="fast",
        build=BuildParams(alpha=2.0, r=12, l_build=30),
        seed=3,
    )
    base.update(kw)
    return SweepConfig(**base)


def test_sweep_shape_and_determinism():
    res1 = run_sweep(_tiny_config())
    res2 = run_sweep(_tiny_config())
    assert len(res1.cells) == 4
    assert not res1.failures
    for a, b in zip(res1.cells, res2.cells):
        assert a == b
    # Parallel execution must not change results.
    res3 = run_sweep(_tiny_config(), workers=2)
    assert res1.cells == res3.cells


def test_sweep_csv_bytes_reproducible(tmp_path):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_results_csv(run_sweep(_tiny_config()), p1)
    write_results_csv(run_sweep(_tiny_config()), p2)
    assert p1.read_bytes() == p2.read_bytes()
    header = p1.read_text().splitlines()[0]
    assert header == "n,l_fraction,L,recall_at_k,avg_approx_ratio,mean_steps_to_first_topk,mean_scanned,repeats"


def test_sweep_env_workers(monkeypatch):
    monkeypatch.setenv("VADS_WORKERS", "2")
    res = run_sweep(_tiny_config())
    assert len(res.cells) == 4


def test_sweep_ratio_floor_invariant():
    res = run_sweep(_tiny_config())
    for c in res.cells:
        assert c.avg_approx_ratio >= 1.0 - 1e-9
        assert 0.0 <= c.recall_at_k <= 1.0


def _cells_1x1(value):
    return [CellResult(n=10, l_fraction=0.5, l=5, recall_at_k=value,
                       avg_approx_ratio=1.0, mean_steps_to_first_topk=1.0,
                       mean_scanned=5.0, repeats=1)]


def test_heatmap_pgm_single_cell_full_recall(tmp_path):
    paths = emit_heatmap(_cells_1x1(1.0), tmp_path / "h", metric="recall_at_k")
    pgm = (tmp_path / "h.pgm").read_bytes()
    header, rest = pgm.split(b"\n255\n", 1)
    assert header == b"P5\n1 1"
    assert rest == bytes([255])
    assert str(tmp_path / "h.csv") in paths


def test_heatmap_pgm_header_20x20(tmp_path):
    cells = [
        CellResult(n=n, l_fraction=f / 100, l=1, recall_at_k=0.5,
                   avg_approx_ratio=1.0, mean_steps_to_first_topk=1.0,
                   mean_scanned=1.0, repeats=1)
        for n in range(100, 2100, 100)
        for f in range(1, 21)
    ]
    emit_heatmap(cells, tmp_path / "h")
    data = (tmp_path / "h.pgm").read_bytes()
    tokens = data.split(b"\n", 3)
    assert tokens[0] == b"P5"
    assert tokens[1] == b"20 20"
    assert tokens[2] == b"255"
    assert len(tokens[3]) == 400


def test_heatmap_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    cells = [
        CellResult(n=n, l_fraction=f, l=int(f * n) + 1, recall_at_k=float(rng.uniform()),
                   avg_approx_ratio=float(1 + rng.uniform()), mean_steps_to_first_topk=1.0,
                   mean_scanned=1.0, repeats=1)
        for n in (100, 200, 400)
        for f in (0.1, 0.2)
    ]
    emit_heatmap(cells, tmp_path / "h", metric="recall_at_k")
    grid, fractions, sizes = read_heatmap_csv(tmp_path / "h.csv")
    assert sizes == [100, 200, 400]
    assert fractions == [0.2, 0.1]  # descending rows
    for c in cells:
        i = fractions.index(c.l_fraction)
        j = sizes.index(c.n)
        assert grid[i, j] == c.recall_at_k


def test_heatmap_empty_matrix_rejected(tmp_path):
    with pytest.raises(ValueError):
        emit_heatmap([], tmp_path / "h")


def test_heatmap_png_rendered(tmp_path):
    path = render_heatmap_png(_cells_1x1(0.7), tmp_path / "h.png")
    data = (tmp_path / "h.png").read_bytes()
    assert data[:8] == b"\x89PNG\r\n\x1a\n"
    assert path.endswith("h.png")


def test_inf_steps_serialize_and_reparse(tmp_path):
    cells = _cells_1x1(0.0)
    cells[0].mean_steps_to_first_topk = math.inf
    class R:  # minimal stand-in with the fields the writer touches
        pass
    r = R()
    r.cells = cells
    write_results_csv(r, tmp_path / "r.csv")
    row = (tmp_path / "r.csv").read_text().splitlines()[1].split(",")
    assert row[5] == "inf"
    assert math.isinf(float(row[5]))
