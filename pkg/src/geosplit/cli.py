"""Command-line entry point.

Subcommands: audit, histogram, assign, partition, folds, filter, eval,
validate, serve. Exit codes: 0 success, 1 data/validation failure, 2 usage
errors. Every command is a pure function of its inputs plus seed; pass
--timestamp to pin manifest/bundle creation times for reproducible bytes.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import GeosplitError
from .ingest import load_map_elements, load_samples
from .jsonio import write_json
from .leakage import EVAL_SETS, audit, buffer_filter, distance_curve
from .mapeval import evaluate
from .report import (
    build_manifest,
    export_assignment,
    load_split_csv,
    write_bundle,
    write_plot_csv,
    write_split_csv,
)
from .spatial import cell_histogram, heatmap_export
from .split import (
    FOLD_PRESETS,
    _cut_report,
    auto_partition,
    citywise_folds,
    fold_sizes,
    folds_to_json_dict,
    load_folds,
    load_regions,
    save_regions,
    validate_split,
)
from .version import __version__


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("GEOSPLIT_THREADS")
    return max(1, int(env)) if env else 1


def _parse_floats(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p.strip() != ""]


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _add_common(p: argparse.ArgumentParser, *, samples=True, out=True,
                timestamp=True, threads=False, figures=False) -> None:
    if samples:
        p.add_argument("--samples", required=True, help="samples.jsonl or samples.csv")
        p.add_argument("--format", choices=("jsonl", "csv"), default=None,
                       help="input format (default: inferred from suffix)")
    if out:
        p.add_argument("--out", required=True, help="output directory")
    if timestamp:
        p.add_argument("--timestamp", default=None,
                       help="pin report creation time (ISO-8601) for reproducible bytes")
    if threads:
        p.add_argument("--threads", type=int, default=None,
                       help="worker cap for distance computation "
                            "(default: GEOSPLIT_THREADS or 1)")
    if figures:
        p.add_argument("--figures", action="store_true",
                       help="also render matplotlib figures next to the data files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geosplit",
                                     description="Geographic split auditing, design, and map evaluation")
    parser.add_argument("--version", action="version", version=f"geosplit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", help="measure val/test overlap with the train set")
    _add_common(p, threads=True, figures=True)
    p.add_argument("--split", required=True, help="split.csv")
    p.add_argument("--thresholds", default="5.0", help="comma-separated meters (default 5.0)")
    p.add_argument("--curve", default=None, metavar="MAX:STEP",
                   help="also audit at thresholds STEP, 2*STEP, ..., MAX")

    p = sub.add_parser("histogram", help="sample density over square cells")
    _add_common(p, figures=True)
    p.add_argument("--cell", type=float, default=60.0, help="cell side length in meters (default 60)")

    p = sub.add_parser("assign", help="apply polygon regions to produce a split")
    _add_common(p, threads=True, figures=True)
    p.add_argument("--regions", required=True, help="regions.json")
    p.add_argument("--mode", choices=("per_sample", "per_sequence"), default="per_sample")

    p = sub.add_parser("partition", help="grow geographically disjoint regions automatically")
    _add_common(p, threads=True)
    p.add_argument("--targets", default="0.70,0.15,0.15",
                   help="train,val,test proportions (default 0.70,0.15,0.15)")
    p.add_argument("--cell", type=float, default=60.0, help="grid cell size in meters (default 60)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lock", default=None, help="split.csv pinning samples to sets")
    p.add_argument("--attrs", default=None,
                   help="comma-separated attribute keys to balance (default: all present)")

    p = sub.add_parser("folds", help="city-wise folds for far-extrapolation cross-validation")
    _add_common(p)
    p.add_argument("--preset", choices=sorted(FOLD_PRESETS), default=None)
    p.add_argument("--folds", default=None, help="folds.json (alternative to --preset)")

    p = sub.add_parser("filter", help="unassign val/test samples near train samples")
    _add_common(p, threads=True)
    p.add_argument("--split", required=True, help="split.csv")
    p.add_argument("--buffer", type=float, default=60.0, help="buffer distance in meters (default 60)")

    p = sub.add_parser("eval", help="score vectorized map predictions against ground truth")
    _add_common(p, samples=False, figures=True)
    p.add_argument("--preds", required=True, help="elements.jsonl with confidences")
    p.add_argument("--gts", required=True, help="elements.jsonl ground truth")
    p.add_argument("--thresholds", default="0.5,1.0,1.5",
                   help="Chamfer thresholds in meters (default 0.5,1.0,1.5)")
    p.add_argument("--resample-interval", type=float, default=0.5,
                   help="polyline resampling interval in meters (default 0.5)")

    p = sub.add_parser("validate", help="check a split against its contract")
    _add_common(p, timestamp=False)
    p.add_argument("--split", required=True, help="split.csv")
    p.add_argument("--regions", default=None, help="optional regions.json to validate")
    p.add_argument("--targets", default="0.70,0.15,0.15")
    p.add_argument("--leak-threshold", type=float, default=5.0)
    p.add_argument("--max-leakage", type=float, default=0.02)
    p.add_argument("--proportion-tol", type=float, default=0.02)
    p.add_argument("--balance-tol", type=float, default=0.05)

    p = sub.add_parser("serve", help="run the local split-designer service")
    _add_common(p, out=False, timestamp=False)
    p.add_argument("--regions", default=None, help="initial regions.json")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8642)
    p.add_argument("--name", default="project")

    return parser


def _cmd_audit(args) -> int:
    ds = load_samples(args.samples, args.format)
    split = load_split_csv(args.split)
    out = _out_dir(args)
    threads = _threads(args)
    thresholds = _parse_floats(args.thresholds)
    report = audit(ds, split, thresholds, threads=threads)
    write_json(out / "leakage.json", report.to_json_dict())
    write_plot_csv(out / "leakage.csv", report)
    sections = {"leakage": report.to_json_dict()}
    if args.curve:
        max_part, step_part = args.curve.split(":")
        curve = distance_curve(ds, split, float(max_part), float(step_part), threads=threads)
        write_plot_csv(out / "curve.csv", curve)
        sections["curve"] = {"points": [[t, v, w] for t, v, w in curve]}
        if args.figures:
            from .figures import save_distance_curve_figure
            save_distance_curve_figure(curve, out / "curve.png")
    write_bundle(out / "bundle.json", sections, [args.samples, args.split], args.timestamp)
    for name in EVAL_SETS:
        ratios = report.sets[name].ratios
        shown = ", ".join(f"{t:g}m={'n/a' if r is None else f'{r:.3f}'}"
                          for t, r in zip(report.thresholds, ratios))
        print(f"{name}: {shown}")
    return 0


def _cmd_histogram(args) -> int:
    ds = load_samples(args.samples, args.format)
    out = _out_dir(args)
    hist = cell_histogram(ds, cell_size=args.cell)
    write_json(out / "histogram.json", hist.to_json_dict())
    write_plot_csv(out / "histogram.csv", hist)
    for map_id in sorted(hist.counts):
        grid = heatmap_export(hist, map_id)
        write_json(out / f"heatmap_{map_id}.json", grid)
        if args.figures:
            from .figures import save_heatmap_figure
            save_heatmap_figure(grid, out / f"heatmap_{map_id}.png")
    write_bundle(out / "bundle.json", {"histogram": hist.to_json_dict()},
                 [args.samples], args.timestamp)
    print(f"{hist.total()} samples in {hist.non_empty_cells()} non-empty "
          f"{args.cell:g} m cells over {len(hist.counts)} maps")
    return 0


def _cmd_assign(args) -> int:
    ds = load_samples(args.samples, args.format)
    regions = load_regions(args.regions)
    out = _out_dir(args)
    split, cut = export_assignment(ds, regions, out, args.samples,
                                   regions_path=args.regions, timestamp=args.timestamp,
                                   mode=args.mode, threads=_threads(args))
    if args.figures:
        from .figures import save_balance_figure
        from .split import balance_report
        save_balance_figure(balance_report(ds, split), out / "balance.png")
    counts = split.counts()
    print(f"assigned {counts['train']}/{counts['val']}/{counts['test']} train/val/test "
          f"({counts['unassigned']} unassigned), {cut.cut_sequences} cut sequences")
    return 0


def _cmd_partition(args) -> int:
    ds = load_samples(args.samples, args.format)
    targets = _parse_floats(args.targets)
    if len(targets) != 3:
        raise ValueError("--targets needs exactly three proportions")
    locked = load_split_csv(args.lock) if args.lock else None
    attrs = args.attrs.split(",") if args.attrs else None
    out = _out_dir(args)
    regions, split, cut = auto_partition(
        ds, targets=tuple(targets), cell_size=args.cell, attribute_keys=attrs,
        locked=locked, seed=args.seed,
    )
    save_regions(regions, out / "regions.json")
    write_split_csv(out / "split.csv", ds, split)
    write_json(out / "cut_report.json", cut.to_json_dict())
    inputs = [args.samples, out / "regions.json"] + ([args.lock] if args.lock else [])
    manifest = build_manifest(ds, split, cut.cut_sequences, inputs=inputs,
                              timestamp=args.timestamp, threads=_threads(args))
    write_json(out / "manifest.json", manifest)
    props = split.proportions()
    print(f"partitioned into {len(regions.regions)} regions; proportions "
          f"train={props['train']:.3f} val={props['val']:.3f} test={props['test']:.3f}, "
          f"{cut.cut_sequences} cut sequences")
    return 0


def _cmd_folds(args) -> int:
    if (args.preset is None) == (args.folds is None):
        raise ValueError("pass exactly one of --preset or --folds")
    ds = load_samples(args.samples, args.format)
    folds = list(FOLD_PRESETS[args.preset]) if args.preset else load_folds(args.folds)
    out = _out_dir(args)
    splits = citywise_folds(ds, folds)
    write_json(out / "folds.json", folds_to_json_dict(folds))
    sizes = fold_sizes(ds, splits)
    write_json(out / "fold_sizes.json", sizes)
    for name, split in splits.items():
        write_split_csv(out / f"split_{name}.csv", ds, split)
        manifest = build_manifest(ds, split, None, inputs=[args.samples],
                                  timestamp=args.timestamp)
        write_json(out / f"manifest_{name}.json", manifest)
        counts = split.counts()
        print(f"fold {name}: train={counts['train']} val={counts['val']} "
              f"(train fraction {sizes[name]['train_fraction']:.3f})")
    return 0


def _cmd_filter(args) -> int:
    ds = load_samples(args.samples, args.format)
    split = load_split_csv(args.split)
    out = _out_dir(args)
    filtered = buffer_filter(ds, split, buffer=args.buffer, threads=_threads(args))
    write_split_csv(out / "split.csv", ds, filtered)
    cut = _cut_report(ds, filtered.assignment)
    write_json(out / "cut_report.json", cut.to_json_dict())
    manifest = build_manifest(ds, filtered, cut.cut_sequences,
                              inputs=[args.samples, args.split],
                              timestamp=args.timestamp, threads=_threads(args))
    write_json(out / "manifest.json", manifest)
    before = split.counts()
    after = filtered.counts()
    removed = (before["val"] - after["val"]) + (before["test"] - after["test"])
    print(f"unassigned {removed} val/test samples within {args.buffer:g} m of train")
    return 0


def _cmd_eval(args) -> int:
    gts = load_map_elements(args.gts, require_confidence=False)
    preds = load_map_elements(args.preds, require_confidence=True)
    out = _out_dir(args)
    report = evaluate(preds, gts, thresholds=_parse_floats(args.thresholds),
                      resample_interval=args.resample_interval)
    write_json(out / "eval_report.json", report.to_json_dict())
    write_plot_csv(out / "eval_report.csv", report)
    write_bundle(out / "bundle.json", {"eval": report.to_json_dict()},
                 [args.preds, args.gts], args.timestamp)
    if args.figures:
        from .figures import save_eval_figure
        save_eval_figure(report, out / "eval_ap.png")
    for c, m in report.class_map.items():
        print(f"{c}: mAP={'n/a' if m is None else f'{m:.4f}'}")
    print(f"mean: {'n/a' if report.mean_map is None else f'{report.mean_map:.4f}'}")
    return 0


def _cmd_validate(args) -> int:
    ds = load_samples(args.samples, args.format)
    split = load_split_csv(args.split)
    regions = load_regions(args.regions) if args.regions else None
    targets = _parse_floats(args.targets)
    result = validate_split(ds, split, regions=regions, targets=tuple(targets),
                            leak_threshold=args.leak_threshold,
                            max_leakage=args.max_leakage,
                            proportion_tol=args.proportion_tol,
                            balance_tol=args.balance_tol)
    out = _out_dir(args)
    write_json(out / "validation.json", result)
    for check in result["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        measured = check["measured"]
        shown = "" if measured is None else f" measured={measured}"
        print(f"{status} {check['name']}{shown} ({check['detail']})")
    return 0 if result["passed"] else 1


def _cmd_serve(args) -> int:
    from .service import serve

    ds = load_samples(args.samples, args.format)
    regions = load_regions(args.regions) if args.regions else None
    print(f"serving split designer for {len(ds)} samples on http://{args.host}:{args.port}")
    serve(ds, args.samples, host=args.host, port=args.port, regions=regions, name=args.name)
    return 0


_COMMANDS = {
    "audit": _cmd_audit,
    "histogram": _cmd_histogram,
    "assign": _cmd_assign,
    "partition": _cmd_partition,
    "folds": _cmd_folds,
    "filter": _cmd_filter,
    "eval": _cmd_eval,
    "validate": _cmd_validate,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (GeosplitError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
