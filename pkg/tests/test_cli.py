import json

import pytest

from geosplit.cli import build_parser, main
from geosplit.ingest import save_map_elements, save_samples, MapElement
from geosplit.jsonio import read_json, write_json
from geosplit.report import load_split_csv, write_split_csv

from conftest import dataset_from_points, planted_leakage_dataset


@pytest.fixture
def planted(tmp_path):
    ds, split = planted_leakage_dataset(0.8, n_val=10)
    samples = tmp_path / "samples.jsonl"
    save_samples(ds, samples)
    split_csv = tmp_path / "split.csv"
    write_split_csv(split_csv, ds, split)
    return ds, samples, split_csv


def test_audit_planted(tmp_path, planted, capsys):
    _, samples, split_csv = planted
    out = tmp_path / "out"
    code = main(["audit", "--samples", str(samples), "--split", str(split_csv),
                 "--thresholds", "5", "--out", str(out), "--timestamp", "t0"])
    assert code == 0
    report = read_json(out / "leakage.json")
    assert report["sets"]["val"]["ratios"] == [0.8]
    assert "val: 5m=0.800" in capsys.readouterr().out
    assert (out / "leakage.csv").exists()
    assert (out / "bundle.json").exists()


def test_audit_curve_and_figures(tmp_path, planted):
    _, samples, split_csv = planted
    out = tmp_path / "out"
    code = main(["audit", "--samples", str(samples), "--split", str(split_csv),
                 "--out", str(out), "--curve", "20:5", "--figures", "--timestamp", "t0"])
    assert code == 0
    assert (out / "curve.csv").exists()
    assert (out / "curve.png").stat().st_size > 0


def test_histogram_with_heatmaps(tmp_path):
    ds = dataset_from_points([(10, 10), (130, 10), (70, 70)])
    samples = tmp_path / "samples.jsonl"
    save_samples(ds, samples)
    out = tmp_path / "out"
    code = main(["histogram", "--samples", str(samples), "--cell", "60",
                 "--out", str(out), "--figures", "--timestamp", "t0"])
    assert code == 0
    hist = read_json(out / "histogram.json")
    assert hist["total_samples"] == 3
    assert (out / "heatmap_m0.json").exists()
    assert (out / "heatmap_m0.png").exists()


def test_assign_and_validate_flow(tmp_path):
    pts = [(x + 0.5, y + 0.5) for x in range(0, 100, 10) for y in range(0, 100, 10)]
    ds = dataset_from_points(pts)
    samples = tmp_path / "samples.jsonl"
    save_samples(ds, samples)
    regions = {
        "regions": [
            {"name": "tr", "map_id": "m0", "set": "train", "priority": 1,
             "polygon": [[0, 0], [100, 0], [100, 70], [0, 70]]},
            {"name": "va", "map_id": "m0", "set": "val", "priority": 2,
             "polygon": [[0, 70], [100, 70], [100, 85], [0, 85]]},
            {"name": "te", "map_id": "m0", "set": "test", "priority": 3,
             "polygon": [[0, 85], [100, 85], [100, 100], [0, 100]]},
        ]
    }
    regions_path = tmp_path / "regions.json"
    write_json(regions_path, regions)
    out = tmp_path / "out"
    code = main(["assign", "--samples", str(samples), "--regions", str(regions_path),
                 "--out", str(out), "--timestamp", "t0"])
    assert code == 0
    split = load_split_csv(out / "split.csv")
    counts = split.counts()
    assert counts["train"] == 70 and counts["val"] == 20 and counts["test"] == 10
    manifest = read_json(out / "manifest.json")
    assert manifest["cut_sequences"] == 0
    assert manifest["created"] == "t0"

    code = main(["validate", "--samples", str(samples), "--split", str(out / "split.csv"),
                 "--regions", str(regions_path), "--max-leakage", "1.0",
                 "--proportion-tol", "0.06", "--out", str(tmp_path / "val_out")])
    assert code == 0


def test_partition_determinism(tmp_path):
    pts = [(x + 0.5, y + 0.5) for x in range(0, 300, 15) for y in range(0, 300, 15)]
    ds = dataset_from_points(pts)
    samples = tmp_path / "samples.jsonl"
    save_samples(ds, samples)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        code = main(["partition", "--samples", str(samples), "--seed", "7",
                     "--out", str(out), "--timestamp", "t0"])
        assert code == 0
        outs.append(out)
    for fname in ("regions.json", "split.csv", "manifest.json", "cut_report.json"):
        assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()


def test_partition_with_lock(tmp_path):
    pts = [(x + 0.5, y + 0.5) for x in range(0, 200, 10) for y in range(0, 200, 10)]
    ds = dataset_from_points(pts)
    samples = tmp_path / "samples.jsonl"
    save_samples(ds, samples)
    lock_path = tmp_path / "lock.csv"
    locked_ids = [s.id for s in ds.samples[:20]]
    lock_path.write_text("sample_id,set\n" + "".join(f"{sid},test\n" for sid in locked_ids))
    out = tmp_path / "out"
    code = main(["partition", "--samples", str(samples), "--lock", str(lock_path),
                 "--out", str(out), "--timestamp", "t0"])
    assert code == 0
    split = load_split_csv(out / "split.csv")
    assert all(split.assignment[sid] == "test" for sid in locked_ids)


def test_folds_preset(tmp_path):
    pts = []
    for m, n in (("boston-seaport", 11), ("singapore-onenorth", 4),
                 ("singapore-queenstown", 3), ("singapore-hollandvillage", 2)):
        pts += [(i, 0, m) for i in range(n)]
    ds = dataset_from_points(pts)
    samples = tmp_path / "samples.jsonl"
    save_samples(ds, samples)
    out = tmp_path / "out"
    code = main(["folds", "--samples", str(samples), "--preset", "nuscenes",
                 "--out", str(out), "--timestamp", "t0"])
    assert code == 0
    folds = read_json(out / "folds.json")
    assert [f["name"] for f in folds["folds"]] == ["A", "B"]
    split_a = load_split_csv(out / "split_A.csv")
    for s in ds.samples:
        expected = "train" if s.map_id in ("boston-seaport", "singapore-onenorth") else "val"
        assert split_a.assignment[s.id] == expected
    sizes = read_json(out / "fold_sizes.json")
    assert sizes["A"]["counts"]["train"] == 15


def test_folds_requires_exactly_one_source(tmp_path, planted):
    _, samples, _ = planted
    code = main(["folds", "--samples", str(samples), "--out", str(tmp_path / "o")])
    assert code == 1


def test_filter_and_reaudit(tmp_path, planted):
    _, samples, split_csv = planted
    out = tmp_path / "filtered"
    code = main(["filter", "--samples", str(samples), "--split", str(split_csv),
                 "--buffer", "60", "--out", str(out), "--timestamp", "t0"])
    assert code == 0
    audit_out = tmp_path / "reaudit"
    code = main(["audit", "--samples", str(samples), "--split", str(out / "split.csv"),
                 "--thresholds", "60", "--out", str(audit_out), "--timestamp", "t0"])
    assert code == 0
    report = read_json(audit_out / "leakage.json")
    assert report["sets"]["val"]["ratios"][0] in (0.0, None)


def test_eval_identical_predictions(tmp_path, capsys):
    gts = {
        f"f{i}": [MapElement(frame_id=f"f{i}", cls="divider",
                             points=((0.0, float(i)), (5.0, float(i))))]
        for i in range(10)
    }
    preds = {
        f: [MapElement(frame_id=f, cls=e.cls, points=e.points, confidence=0.9)
            for e in elements]
        for f, elements in gts.items()
    }
    gts_path = tmp_path / "gts.jsonl"
    preds_path = tmp_path / "preds.jsonl"
    save_map_elements(gts, gts_path)
    save_map_elements(preds, preds_path)
    out = tmp_path / "out"
    code = main(["eval", "--preds", str(preds_path), "--gts", str(gts_path),
                 "--out", str(out), "--timestamp", "t0", "--figures"])
    assert code == 0
    report = read_json(out / "eval_report.json")
    assert report["mean_map"] == 1.0
    assert (out / "eval_report.csv").exists()
    assert (out / "eval_ap.png").exists()
    assert "mean: 1.0000" in capsys.readouterr().out


def test_validate_exit_code_on_failure(tmp_path, planted):
    _, samples, split_csv = planted
    code = main(["validate", "--samples", str(samples), "--split", str(split_csv),
                 "--out", str(tmp_path / "o")])
    assert code == 1


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as e:
        main(["audit", "--nonsense"])
    assert e.value.code == 2


def test_missing_file_exit_code(tmp_path):
    code = main(["histogram", "--samples", str(tmp_path / "nope.jsonl"),
                 "--out", str(tmp_path / "o")])
    assert code == 1


def test_help_lists_flags():
    parser = build_parser()
    expected = {
        "audit": ["--samples", "--split", "--thresholds", "--curve", "--out",
                  "--timestamp", "--threads", "--figures"],
        "histogram": ["--samples", "--cell", "--out", "--figures"],
        "assign": ["--samples", "--regions", "--mode", "--out"],
        "partition": ["--targets", "--cell", "--seed", "--lock", "--attrs"],
        "folds": ["--preset", "--folds"],
        "filter": ["--buffer", "--split"],
        "eval": ["--preds", "--gts", "--thresholds", "--resample-interval"],
        "validate": ["--max-leakage", "--proportion-tol", "--balance-tol",
                     "--leak-threshold", "--regions"],
        "serve": ["--host", "--port", "--regions", "--name"],
    }
    sub_actions = next(a for a in parser._actions
                       if isinstance(a, __import__("argparse")._SubParsersAction))
    for command, flags in expected.items():
        help_text = sub_actions.choices[command].format_help()
        for flag in flags:
            assert flag in help_text, (command, flag)
        assert "default" in help_text


def test_determinism_across_report_commands(tmp_path, planted):
    _, samples, split_csv = planted
    digests = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        main(["audit", "--samples", str(samples), "--split", str(split_csv),
              "--out", str(out), "--curve", "30:10", "--figures", "--timestamp", "t0"])
        digests.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert digests[0] == digests[1]
