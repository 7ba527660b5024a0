"""Report bundles, manifests, and plot-ready CSV series.

Every artifact here is deterministic: canonical JSON (sorted keys, shortest
float repr) and stable CSV column order, with the creation timestamp
injectable so identical inputs yield byte-identical files.
"""

from __future__ import annotations

import csv
import datetime as _dt
from pathlib import Path

from .ingest import Dataset
from .jsonio import canonical_dumps, read_json, sha256_file, write_json
from .leakage import EVAL_SETS, LeakageReport, SplitAssignment, audit
from .mapeval import EvalReport
from .spatial import CellHistogram
from .split import (
    BalanceReport,
    CutReport,
    RegionSet,
    assign_by_regions,
    balance_report,
    save_regions,
)
from .version import __version__


def now_utc() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _check_section(name: str, data: dict) -> None:
    if name == "leakage":
        for s in data.get("sets", {}).values():
            ratios = [r for r in s.get("ratios", []) if r is not None]
            if any(not 0.0 <= r <= 1.0 for r in ratios):
                raise ValueError("leakage ratios outside [0, 1]")
            if ratios != sorted(ratios):
                raise ValueError("leakage ratios not non-decreasing in threshold")
    elif name == "eval":
        for cls in data.get("classes", {}).values():
            aps = [a for a in cls.get("ap", []) if a is not None]
            if any(not 0.0 <= a <= 1.0 for a in aps):
                raise ValueError("AP outside [0, 1]")
            if aps and cls.get("map") is not None:
                if abs(cls["map"] - sum(aps) / len(aps)) > 1e-12:
                    raise ValueError("class mAP is not the mean of its APs")
    elif name == "balance":
        for attr in data.get("attributes", []):
            sums: dict[str, float] = {}
            for per_set in attr.get("ratios", {}).values():
                for group, r in per_set.items():
                    if r is not None:
                        sums[group] = sums.get(group, 0.0) + r
            for group, total in sums.items():
                if abs(total - 1.0) > 1e-9:
                    raise ValueError(f"balance ratios for '{attr['key']}'/{group} sum to {total}")


def bundle(parts: dict[str, dict], inputs, timestamp: str | None = None) -> dict:
    """Assemble named report sections plus input digests into one document."""
    for name, data in parts.items():
        _check_section(name, data)
    digests = sorted(
        ({"name": Path(p).name, "sha256": sha256_file(p)} for p in inputs),
        key=lambda d: d["name"],
    )
    return {
        "tool_version": __version__,
        "created": timestamp if timestamp is not None else now_utc(),
        "inputs": digests,
        "sections": parts,
    }


def write_bundle(path, parts: dict[str, dict], inputs, timestamp: str | None = None) -> dict:
    doc = bundle(parts, inputs, timestamp)
    write_json(path, doc)
    return doc


def verify_bundle(bundle_path, base_dir=None) -> list[str]:
    """Names of bundle inputs whose current digest no longer matches."""
    doc = read_json(bundle_path)
    base = Path(base_dir) if base_dir is not None else Path(bundle_path).parent
    mismatched = []
    for entry in doc.get("inputs", []):
        p = base / entry["name"]
        if not p.exists() or sha256_file(p) != entry["sha256"]:
            mismatched.append(entry["name"])
    return mismatched


# ---------------------------------------------------------------------------
# Plot-ready CSV series

def plot_data(report) -> tuple[list[str], list[dict]]:
    """Tidy rows (one observation each) for external plotting."""
    if isinstance(report, LeakageReport):
        return ["set", "threshold", "ratio"], report.csv_rows()
    if isinstance(report, EvalReport):
        return ["class", "threshold", "ap"], report.csv_rows()
    if isinstance(report, CellHistogram):
        rows = [{"samples_per_cell": k, "cells": v} for k, v in report.marginal().items()]
        return ["samples_per_cell", "cells"], rows
    if isinstance(report, BalanceReport):
        rows = []
        for attr in report.attributes:
            for value, per_set in attr.ratios.items():
                for group in ("train", "val", "test", "full"):
                    r = per_set.get(group)
                    rows.append({"key": attr.key, "value": value, "set": group,
                                 "ratio": "" if r is None else r})
        return ["key", "value", "set", "ratio"], rows
    if isinstance(report, list):  # distance curve: (threshold, val_ratio, test_ratio)
        rows = []
        for si, name in enumerate(EVAL_SETS):
            for entry in report:
                ratio = entry[1 + si]
                rows.append({"set": name, "threshold": entry[0],
                             "ratio": "" if ratio is None else ratio})
        return ["set", "threshold", "ratio"], rows
    raise TypeError(f"no plot series defined for {type(report).__name__}")


def write_plot_csv(path, report) -> None:
    columns, rows = plot_data(report)
    with Path(path).open("w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# Split files and manifests

def write_split_csv(path, ds: Dataset, split: SplitAssignment) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["sample_id", "set"])
        for s in ds.samples:
            writer.writerow([s.id, split.assignment[s.id]])


def load_split_csv(path) -> SplitAssignment:
    assignment: dict[str, str] = {}
    with Path(path).open("r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["sample_id", "set"]:
            raise ValueError(f"expected header 'sample_id,set', got {header}")
        for row in reader:
            if not row:
                continue
            sid, label = row
            if label not in ("train", "val", "test", "unassigned"):
                raise ValueError(f"unknown set label '{label}' for sample '{sid}'")
            assignment[sid] = label
    return SplitAssignment(assignment=assignment, provenance=f"file:{Path(path).name}")


def build_manifest(ds: Dataset, split: SplitAssignment, cut_count: int | None,
                   inputs, timestamp: str | None = None,
                   attribute_keys: list[str] | None = None, threads: int = 1) -> dict:
    """Summary stamped onto every emitted split: proportions, 5 m leakage,
    balance, cut count, tool version, and input digests."""
    counts = split.counts()
    leak = None
    if counts["train"] > 0 and not split.missing_ids(ds):
        report = audit(ds, split, [5.0], threads=threads)
        leak = {name: report.sets[name].ratios[0] for name in EVAL_SETS}
    balance = balance_report(ds, split, attribute_keys)
    digests = sorted(
        ({"name": Path(p).name, "sha256": sha256_file(p)} for p in inputs),
        key=lambda d: d["name"],
    )
    return {
        "tool_version": __version__,
        "created": timestamp if timestamp is not None else now_utc(),
        "inputs": digests,
        "counts": counts,
        "proportions": split.proportions(),
        "leakage_at_5m": leak,
        "balance": {"max_attribute_deviation": balance.max_deviation()},
        "cut_sequences": cut_count,
        "provenance": split.provenance,
    }


def export_assignment(ds: Dataset, regions: RegionSet, out_dir, samples_path,
                      regions_path=None, timestamp: str | None = None,
                      mode: str = "per_sample",
                      threads: int = 1) -> tuple[SplitAssignment, CutReport]:
    """Assign by regions and write split.csv + cut_report.json + manifest.json.

    When regions_path is None the regions are first written to
    out_dir/regions.json so the manifest can digest them; the CLI `assign`
    command and the split-designer service share this path, byte for byte.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if regions_path is None:
        regions_path = out_dir / "regions.json"
        save_regions(regions, regions_path)
    split, cut = assign_by_regions(ds, regions, mode=mode)
    write_split_csv(out_dir / "split.csv", ds, split)
    write_json(out_dir / "cut_report.json", cut.to_json_dict())
    manifest = build_manifest(ds, split, cut.cut_sequences,
                              inputs=[samples_path, regions_path],
                              timestamp=timestamp, threads=threads)
    write_json(out_dir / "manifest.json", manifest)
    return split, cut


def canonical_report_json(report) -> str:
    """Canonical JSON text for any report object with a to_json_dict()."""
    return canonical_dumps(report.to_json_dict())
