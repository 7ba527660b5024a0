from geosplit.figures import (
    save_balance_figure,
    save_distance_curve_figure,
    save_eval_figure,
    save_heatmap_figure,
)
from geosplit.leakage import distance_curve
from geosplit.mapeval import evaluate
from geosplit.ingest import MapElement
from geosplit.spatial import cell_histogram, heatmap_export
from geosplit.split import balance_report

from conftest import dataset_from_points, planted_leakage_dataset


def test_curve_figure_written_and_deterministic(tmp_path):
    ds, split = planted_leakage_dataset(0.5, n_val=8)
    curve = distance_curve(ds, split, max_range=20.0, step=5.0)
    a = tmp_path / "a.png"
    b = tmp_path / "b.png"
    save_distance_curve_figure(curve, a)
    save_distance_curve_figure(curve, b)
    assert a.stat().st_size > 0
    assert a.read_bytes() == b.read_bytes()


def test_heatmap_figure(tmp_path):
    ds = dataset_from_points([(10, 10), (130, 10), (70, 70)])
    grid = heatmap_export(cell_histogram(ds, cell_size=60.0), "m0")
    out = tmp_path / "heatmap.png"
    save_heatmap_figure(grid, out)
    assert out.stat().st_size > 0


def test_balance_figure(tmp_path):
    ds, split = planted_leakage_dataset(0.5, n_val=8)
    out = tmp_path / "balance.png"
    save_balance_figure(balance_report(ds, split), out)
    assert out.stat().st_size > 0


def test_eval_figure(tmp_path):
    gts = {"f0": [MapElement(frame_id="f0", cls="divider", points=((0, 0), (5, 0)))]}
    preds = {"f0": [MapElement(frame_id="f0", cls="divider", points=((0, 0), (5, 0)),
                               confidence=1.0)]}
    out = tmp_path / "eval.png"
    save_eval_figure(evaluate(preds, gts), out)
    assert out.stat().st_size > 0
