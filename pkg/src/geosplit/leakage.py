"""Inter-set geographic overlap audits and distance-buffer filtering.

Thresholds and buffers use strict ``<``: an eval sample exactly at the
threshold distance is not counted as overlapping and is not filtered.
Eval samples on maps with zero training samples have no defined distance;
they are excluded from ratio denominators and tallied separately.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .ingest import Dataset, Sample
from .spatial import SpatialIndex, build_index, nearest_distance

SET_LABELS = ("train", "val", "test", "unassigned")
EVAL_SETS = ("val", "test")
PERCENTILES = (5, 25, 50, 75, 95)


@dataclass(frozen=True)
class SplitAssignment:
    """Total mapping from sample id to set label."""

    assignment: dict[str, str]
    provenance: str = ""

    def label(self, sample_id: str) -> str:
        return self.assignment[sample_id]

    def counts(self) -> dict[str, int]:
        out = {label: 0 for label in SET_LABELS}
        for label in self.assignment.values():
            out[label] += 1
        return out

    def proportions(self) -> dict[str, float]:
        """Set proportions over assigned (non-unassigned) samples."""
        counts = self.counts()
        assigned = counts["train"] + counts["val"] + counts["test"]
        if assigned == 0:
            return {"train": 0.0, "val": 0.0, "test": 0.0}
        return {s: counts[s] / assigned for s in ("train", "val", "test")}

    def ids_for(self, label: str) -> list[str]:
        return [sid for sid, lab in self.assignment.items() if lab == label]

    def missing_ids(self, ds: Dataset) -> list[str]:
        return [s.id for s in ds.samples if s.id not in self.assignment]


def check_split(ds: Dataset, split: SplitAssignment) -> None:
    missing = split.missing_ids(ds)
    if missing:
        head = ", ".join(missing[:5])
        raise ValueError(f"split is not total: {len(missing)} dataset samples unlabeled ({head}...)")
    for label in split.assignment.values():
        if label not in SET_LABELS:
            raise ValueError(f"unknown set label '{label}'")


@dataclass(frozen=True)
class SetLeakage:
    count: int           # eval samples with a defined nearest-train distance
    no_train_map: int    # eval samples on maps without any train sample
    ratios: tuple       # parallel to the report thresholds; None when count == 0
    percentiles: dict[str, float] | None


@dataclass(frozen=True)
class LeakageReport:
    thresholds: tuple[float, ...]
    sets: dict[str, SetLeakage]
    keyframe_only: dict[str, SetLeakage] | None = None

    def to_json_dict(self) -> dict:
        def enc(sets: dict[str, SetLeakage]) -> dict:
            return {
                name: {
                    "count": s.count,
                    "no_train_map": s.no_train_map,
                    "ratios": list(s.ratios),
                    "percentiles": s.percentiles,
                }
                for name, s in sets.items()
            }

        out = {"thresholds": list(self.thresholds), "sets": enc(self.sets)}
        if self.keyframe_only is not None:
            out["keyframe_only"] = enc(self.keyframe_only)
        return out

    def csv_rows(self) -> list[dict]:
        rows = []
        for name in EVAL_SETS:
            s = self.sets[name]
            for tau, ratio in zip(self.thresholds, s.ratios):
                rows.append({"set": name, "threshold": tau,
                             "ratio": "" if ratio is None else ratio})
        return rows


def _nearest_train_distances(ds: Dataset, samples: list[Sample],
                             train_idx: SpatialIndex, threads: int = 1) -> list[float | None]:
    """Nearest-train distance per sample, positionally (None = no train on map)."""
    if threads <= 1 or len(samples) < 64:
        return [nearest_distance(train_idx, s) for s in samples]
    chunk = (len(samples) + threads - 1) // threads
    slices = [samples[i:i + chunk] for i in range(0, len(samples), chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda sl: [nearest_distance(train_idx, s) for s in sl], slices))
    return [d for part in parts for d in part]


def _summarize(distances: list[float | None], thresholds) -> SetLeakage:
    defined = [d for d in distances if d is not None]
    no_train = len(distances) - len(defined)
    if not defined:
        return SetLeakage(count=0, no_train_map=no_train,
                          ratios=tuple(None for _ in thresholds), percentiles=None)
    arr = np.asarray(defined)
    ratios = tuple(int(np.count_nonzero(arr < tau)) / len(defined) for tau in thresholds)
    pct = {f"p{p}": float(np.percentile(arr, p)) for p in PERCENTILES}
    return SetLeakage(count=len(defined), no_train_map=no_train, ratios=ratios, percentiles=pct)


def audit(ds: Dataset, split: SplitAssignment, thresholds,
          threads: int = 1) -> LeakageReport:
    """Ratio of val/test samples whose nearest-train distance is below each
    threshold, plus distance percentiles per set."""
    thresholds = tuple(float(t) for t in thresholds)
    if not thresholds or any(t <= 0 for t in thresholds):
        raise ValueError("thresholds must be positive")
    if list(thresholds) != sorted(thresholds):
        raise ValueError("thresholds must be sorted ascending")
    check_split(ds, split)
    train_ids = {sid for sid, lab in split.assignment.items() if lab == "train"}
    if not train_ids:
        raise ValueError("leakage audit needs at least one train sample")

    train_idx = build_index(ds, subset=train_ids)
    eval_samples = {name: [s for s in ds.samples if split.assignment[s.id] == name]
                    for name in EVAL_SETS}
    distances = {name: _nearest_train_distances(ds, samples, train_idx, threads)
                 for name, samples in eval_samples.items()}

    sets = {name: _summarize(distances[name], thresholds) for name in EVAL_SETS}

    keyframe_only = None
    if any(not s.keyframe for s in ds.samples):
        keyframe_only = {}
        for name in EVAL_SETS:
            kept = [d for s, d in zip(eval_samples[name], distances[name]) if s.keyframe]
            keyframe_only[name] = _summarize(kept, thresholds)

    return LeakageReport(thresholds=thresholds, sets=sets, keyframe_only=keyframe_only)


def buffer_filter(ds: Dataset, split: SplitAssignment, buffer: float = 60.0,
                  threads: int = 1) -> SplitAssignment:
    """Relabel val/test samples with nearest-train distance < buffer as
    unassigned. Train labels are untouched."""
    if buffer <= 0:
        raise ValueError("buffer must be > 0")
    check_split(ds, split)
    train_ids = {sid for sid, lab in split.assignment.items() if lab == "train"}
    train_idx = build_index(ds, subset=train_ids)
    eval_samples = [s for s in ds.samples if split.assignment[s.id] in EVAL_SETS]
    distances = _nearest_train_distances(ds, eval_samples, train_idx, threads)
    relabel = {s.id for s, d in zip(eval_samples, distances)
               if d is not None and d < buffer}
    assignment = {sid: ("unassigned" if sid in relabel else lab)
                  for sid, lab in split.assignment.items()}
    return SplitAssignment(assignment=assignment,
                           provenance=f"{split.provenance}|buffer_filter({buffer})")


def distance_curve(ds: Dataset, split: SplitAssignment, max_range: float,
                   step: float, threads: int = 1) -> list[tuple[float, float | None, float | None]]:
    """Audit at thresholds step, 2*step, ..., max_range with one distance pass."""
    if step <= 0:
        raise ValueError("step must be > 0")
    if max_range < step:
        raise ValueError("max_range must be >= step")
    n = int(max_range / step + 1e-9)
    thresholds = [step * i for i in range(1, n + 1)]
    report = audit(ds, split, thresholds, threads=threads)
    val = report.sets["val"].ratios
    test = report.sets["test"].ratios
    return [(tau, val[i], test[i]) for i, tau in enumerate(report.thresholds)]
