"""Vectorized-map scoring: Chamfer-threshold average precision and
rasterized IoU.

Predictions and ground truth are matched once per frame and class: in order
of descending confidence, each prediction takes the unmatched ground-truth
element with the smallest Chamfer distance. Average precision at a threshold
then counts a matched pair as a true positive when its distance is strictly
below the threshold, so one matching serves every threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MissingConfidenceError, ShapeMismatchError
from .ingest import ELEMENT_CLASSES, MapElement

DEFAULT_THRESHOLDS = (0.5, 1.0, 1.5)
DEFAULT_RESAMPLE_INTERVAL = 0.5


def resample_polyline(points, interval: float = DEFAULT_RESAMPLE_INTERVAL) -> np.ndarray:
    """Points at fixed arc-length steps along the polyline, both endpoints kept."""
    if interval <= 0:
        raise ValueError("interval must be > 0")
    pts = np.asarray(points, dtype=float)
    seg = np.diff(pts, axis=0)
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = cum[-1]
    stations = [0.0]
    k = 1
    while k * interval < total:
        stations.append(k * interval)
        k += 1
    stations.append(total)
    st = np.asarray(stations)
    x = np.interp(st, cum, pts[:, 0])
    y = np.interp(st, cum, pts[:, 1])
    return np.stack([x, y], axis=1)


def chamfer(a, b, resample_interval: float = DEFAULT_RESAMPLE_INTERVAL) -> float:
    """Symmetric mean nearest-point distance between two resampled polylines."""
    ra = resample_polyline(a, resample_interval)
    rb = resample_polyline(b, resample_interval)
    d = np.sqrt(((ra[:, None, :] - rb[None, :, :]) ** 2).sum(axis=2))
    return 0.5 * (float(d.min(axis=1).mean()) + float(d.min(axis=0).mean()))


@dataclass(frozen=True)
class Match:
    frame_id: str
    pred_index: int          # position within the frame's prediction list
    gt_index: int | None     # position within the frame's ground-truth list
    distance: float          # inf when unmatched
    confidence: float


@dataclass(frozen=True)
class MatchResult:
    # class -> matches in prediction input order; thresholds applied later
    matches: dict[str, list[Match]]
    gt_counts: dict[str, int]
    pred_counts: dict[str, int]


def _split_by_class(elements: list[MapElement]) -> dict[str, list[MapElement]]:
    out: dict[str, list[MapElement]] = {c: [] for c in ELEMENT_CLASSES}
    for el in elements:
        out[el.cls].append(el)
    return out


def match_elements(preds: dict[str, list[MapElement]], gts: dict[str, list[MapElement]],
                   resample_interval: float = DEFAULT_RESAMPLE_INTERVAL) -> MatchResult:
    """Greedy confidence-ordered matching, per frame and class."""
    unknown = [f for f in preds if f not in gts]
    if unknown:
        raise ValueError(f"prediction frames missing from ground truth: {sorted(unknown)[:5]}")

    matches: dict[str, list[Match]] = {c: [] for c in ELEMENT_CLASSES}
    gt_counts = {c: 0 for c in ELEMENT_CLASSES}
    pred_counts = {c: 0 for c in ELEMENT_CLASSES}

    for frame_id, gt_elements in gts.items():
        gt_by_class = _split_by_class(gt_elements)
        for c in ELEMENT_CLASSES:
            gt_counts[c] += len(gt_by_class[c])
        pred_elements = preds.get(frame_id, [])
        pred_by_class = _split_by_class(pred_elements)
        for c in ELEMENT_CLASSES:
            frame_preds = pred_by_class[c]
            if not frame_preds:
                continue
            pred_counts[c] += len(frame_preds)
            for el in frame_preds:
                if el.confidence is None:
                    raise MissingConfidenceError(frame_id)
            frame_gts = gt_by_class[c]
            resampled_preds = [resample_polyline(el.points, resample_interval) for el in frame_preds]
            resampled_gts = [resample_polyline(el.points, resample_interval) for el in frame_gts]

            order = sorted(range(len(frame_preds)),
                           key=lambda i: -frame_preds[i].confidence)
            taken: set[int] = set()
            frame_matches: dict[int, Match] = {}
            for pi in order:
                best_gi = None
                best_d = np.inf
                rp = resampled_preds[pi]
                for gi, rg in enumerate(resampled_gts):
                    if gi in taken:
                        continue
                    d = np.sqrt(((rp[:, None, :] - rg[None, :, :]) ** 2).sum(axis=2))
                    dist = 0.5 * (float(d.min(axis=1).mean()) + float(d.min(axis=0).mean()))
                    if dist < best_d:
                        best_d = dist
                        best_gi = gi
                if best_gi is not None:
                    taken.add(best_gi)
                frame_matches[pi] = Match(
                    frame_id=frame_id, pred_index=pi, gt_index=best_gi,
                    distance=best_d if best_gi is not None else np.inf,
                    confidence=frame_preds[pi].confidence,
                )
            # Store in input order; AP sorts globally by confidence.
            matches[c].extend(frame_matches[pi] for pi in range(len(frame_preds)))

    return MatchResult(matches=matches, gt_counts=gt_counts, pred_counts=pred_counts)


def _ap_from_matches(matches: list[Match], gt_count: int, tau: float) -> float | None:
    if gt_count == 0:
        return None
    if not matches:
        return 0.0
    ordered = sorted(matches, key=lambda m: -m.confidence)  # stable: ties keep input order
    tp = np.array([m.gt_index is not None and m.distance < tau for m in ordered], dtype=float)
    cum_tp = np.cumsum(tp)
    ranks = np.arange(1, len(ordered) + 1)
    precision = cum_tp / ranks
    recall = cum_tp / gt_count
    # Exact area under the monotonized (from the right) PR curve.
    precision = np.maximum.accumulate(precision[::-1])[::-1]
    prev_recall = np.concatenate([[0.0], recall[:-1]])
    return float(np.sum((recall - prev_recall) * precision))


def ap_at_threshold(preds: dict[str, list[MapElement]], gts: dict[str, list[MapElement]],
                    tau: float, cls: str,
                    resample_interval: float = DEFAULT_RESAMPLE_INTERVAL) -> float | None:
    """AP for one class at one Chamfer threshold, over all frames jointly."""
    result = match_elements(preds, gts, resample_interval)
    return _ap_from_matches(result.matches[cls], result.gt_counts[cls], tau)


@dataclass(frozen=True)
class EvalReport:
    thresholds: tuple[float, ...]
    # class -> threshold-parallel AP list (None when the class has no ground truth)
    ap: dict[str, tuple]
    class_map: dict[str, float | None]
    mean_map: float | None
    gt_counts: dict[str, int]
    pred_counts: dict[str, int]
    frame_count: int

    def to_json_dict(self) -> dict:
        return {
            "thresholds": list(self.thresholds),
            "classes": {
                c: {
                    "ap": list(self.ap[c]),
                    "map": self.class_map[c],
                    "gt_count": self.gt_counts[c],
                    "pred_count": self.pred_counts[c],
                }
                for c in ELEMENT_CLASSES
            },
            "mean_map": self.mean_map,
            "frame_count": self.frame_count,
            "classes_without_gt": [c for c in ELEMENT_CLASSES if self.gt_counts[c] == 0],
        }

    def csv_rows(self) -> list[dict]:
        rows = []
        for c in ELEMENT_CLASSES:
            for tau, ap in zip(self.thresholds, self.ap[c]):
                rows.append({"class": c, "threshold": tau, "ap": "" if ap is None else ap})
        return rows


def evaluate(preds: dict[str, list[MapElement]], gts: dict[str, list[MapElement]],
             thresholds=DEFAULT_THRESHOLDS,
             resample_interval: float = DEFAULT_RESAMPLE_INTERVAL) -> EvalReport:
    """Per-class AP at each threshold, class mAP (mean over thresholds), and
    the overall mean over classes with ground truth."""
    thresholds = tuple(float(t) for t in thresholds)
    if not thresholds or any(t <= 0 for t in thresholds):
        raise ValueError("thresholds must be positive")
    result = match_elements(preds, gts, resample_interval)

    ap: dict[str, tuple] = {}
    class_map: dict[str, float | None] = {}
    for c in ELEMENT_CLASSES:
        values = tuple(_ap_from_matches(result.matches[c], result.gt_counts[c], tau)
                       for tau in thresholds)
        ap[c] = values
        class_map[c] = (sum(values) / len(values)) if values[0] is not None else None

    defined = [m for m in class_map.values() if m is not None]
    mean_map = sum(defined) / len(defined) if defined else None
    return EvalReport(
        thresholds=thresholds, ap=ap, class_map=class_map, mean_map=mean_map,
        gt_counts=result.gt_counts, pred_counts=result.pred_counts,
        frame_count=len(gts),
    )


# ---------------------------------------------------------------------------
# Rasterization

@dataclass(frozen=True)
class RasterSpec:
    x_min: float = -30.0
    x_max: float = 30.0
    y_min: float = -15.0
    y_max: float = 15.0
    resolution: float = 0.15
    half_width: float = 0.5

    def validate(self) -> None:
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ValueError("raster ranges must be ordered")
        if self.resolution <= 0 or self.half_width <= 0:
            raise ValueError("resolution and half_width must be > 0")

    def shape(self) -> tuple[int, int]:
        nx = int(round((self.x_max - self.x_min) / self.resolution))
        ny = int(round((self.y_max - self.y_min) / self.resolution))
        return (ny, nx)


def rasterize(elements: list[MapElement], spec: RasterSpec = RasterSpec()) -> dict[str, np.ndarray]:
    """Per-class binary masks; a pixel is set when its center lies within
    half_width of the polyline. Geometry outside the window is clipped."""
    spec.validate()
    ny, nx = spec.shape()
    # Pixel centers relative to the window origin, so shifting window and
    # geometry together leaves the drawing unchanged.
    xc = (np.arange(nx) + 0.5) * spec.resolution
    yc = (np.arange(ny) + 0.5) * spec.resolution
    px = xc[None, :]
    py = yc[:, None]
    masks = {c: np.zeros((ny, nx), dtype=bool) for c in ELEMENT_CLASSES}
    r2 = spec.half_width ** 2
    for el in elements:
        mask = masks[el.cls]
        pts = [(x - spec.x_min, y - spec.y_min) for x, y in el.points]
        for (ax, ay), (bx, by) in zip(pts[:-1], pts[1:]):
            dx = bx - ax
            dy = by - ay
            seg2 = dx * dx + dy * dy
            if seg2 == 0.0:
                t = np.zeros_like(px * py)
            else:
                t = np.clip(((px - ax) * dx + (py - ay) * dy) / seg2, 0.0, 1.0)
            qx = ax + t * dx
            qy = ay + t * dy
            d2 = (px - qx) ** 2 + (py - qy) ** 2
            mask |= d2 <= r2
    return masks


def iou(pred_mask: np.ndarray, gt_mask: np.ndarray) -> float:
    """Intersection over union of two binary masks; 1.0 when both are empty."""
    if pred_mask.shape != gt_mask.shape:
        raise ShapeMismatchError(pred_mask.shape, gt_mask.shape)
    a = pred_mask.astype(bool)
    b = gt_mask.astype(bool)
    union = int(np.logical_or(a, b).sum())
    if union == 0:
        return 1.0
    return int(np.logical_and(a, b).sum()) / union
