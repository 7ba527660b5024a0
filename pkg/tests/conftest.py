"""Shared builders and independent oracle implementations.

The oracles here deliberately avoid the library's own code paths: nearest
distances by full pairwise scan, Chamfer by double loops over resampled
points, AP by an independent greedy matcher and PR-area computation.
"""

from __future__ import annotations

import math
import random

import numpy as np
import pytest
from hypothesis import settings

from geosplit.ingest import Dataset, MapElement, Sample

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")


# ---------------------------------------------------------------------------
# Dataset builders

def make_sample(i, x, y, *, seq=None, map_id="m0", t=None, keyframe=True, attrs=None):
    return Sample(id=f"s{i}", sequence_id=seq or f"q{i}", map_id=map_id,
                  x=float(x), y=float(y), t=t if t is not None else i,
                  keyframe=keyframe, attrs=attrs or {})


def dataset_from_points(points, **kwargs):
    """points: list of (x, y) or (x, y, map_id)."""
    samples = []
    for i, p in enumerate(points):
        map_id = p[2] if len(p) > 2 else "m0"
        samples.append(make_sample(i, p[0], p[1], map_id=map_id, **kwargs))
    return Dataset.from_samples(samples)


def random_dataset(rng: random.Random, n: int, maps=("m0",), extent=1000.0,
                   seq_len=10, attr_keys=()) -> Dataset:
    samples = []
    seq = 0
    t = 0
    while len(samples) < n:
        map_id = maps[rng.randrange(len(maps))]
        length = min(rng.randint(1, seq_len), n - len(samples))
        for _ in range(length):
            attrs = {k: rng.choice(["a", "b"]) for k in attr_keys if rng.random() < 0.8}
            samples.append(Sample(
                id=f"s{len(samples)}", sequence_id=f"q{seq}", map_id=map_id,
                x=rng.uniform(0, extent), y=rng.uniform(0, extent), t=t,
                keyframe=rng.random() < 0.5, attrs=attrs,
            ))
            t += 1
        seq += 1
    return Dataset.from_samples(samples)


def random_split(rng: random.Random, ds: Dataset, weights=(0.7, 0.15, 0.15)):
    from geosplit.leakage import SplitAssignment
    labels = ("train", "val", "test")
    assignment = {s.id: rng.choices(labels, weights=weights)[0] for s in ds.samples}
    # Guarantee at least one train sample so audits are defined.
    assignment[ds.samples[0].id] = "train"
    return SplitAssignment(assignment=assignment, provenance="random")


# ---------------------------------------------------------------------------
# Nearest-distance oracle (full pairwise scan)

def brute_nearest(ds: Dataset, reference_ids: set[str], query: Sample) -> float | None:
    pts = [(s.x, s.y) for s in ds.samples
           if s.id in reference_ids and s.map_id == query.map_id]
    if not pts:
        return None
    arr = np.asarray(pts)
    dx = arr[:, 0] - query.x
    dy = arr[:, 1] - query.y
    return float(np.sqrt(np.min(dx * dx + dy * dy)))


# ---------------------------------------------------------------------------
# Chamfer / AP oracles

def resample_reference(points, interval):
    pts = [(float(x), float(y)) for x, y in points]
    cum = [0.0]
    for (ax, ay), (bx, by) in zip(pts[:-1], pts[1:]):
        cum.append(cum[-1] + math.hypot(bx - ax, by - ay))
    total = cum[-1]
    stations = [0.0]
    k = 1
    while k * interval < total:
        stations.append(k * interval)
        k += 1
    stations.append(total)
    out = []
    for s in stations:
        seg = min(max(np.searchsorted(cum, s, side="right") - 1, 0), len(pts) - 2)
        c0, c1 = cum[seg], cum[seg + 1]
        frac = 0.0 if c1 == c0 else (s - c0) / (c1 - c0)
        out.append((pts[seg][0] + frac * (pts[seg + 1][0] - pts[seg][0]),
                    pts[seg][1] + frac * (pts[seg + 1][1] - pts[seg][1])))
    return out


def chamfer_reference(a, b, interval=0.5) -> float:
    ra = resample_reference(a, interval)
    rb = resample_reference(b, interval)

    def mean_min(p, q):
        total = 0.0
        for px, py in p:
            total += min(math.hypot(px - qx, py - qy) for qx, qy in q)
        return total / len(p)

    return 0.5 * (mean_min(ra, rb) + mean_min(rb, ra))


def match_reference(preds: dict[str, list[MapElement]], gts: dict[str, list[MapElement]],
                    cls: str, interval=0.5):
    """Independent greedy matcher: matched distances in confidence order
    (None = unmatched), plus the GT element count."""
    entries = []  # (confidence, order, frame, distances to each gt)
    gt_total = 0
    order = 0
    for frame, gt_elements in gts.items():
        frame_gts = [el for el in gt_elements if el.cls == cls]
        gt_total += len(frame_gts)
        for el in preds.get(frame, []):
            if el.cls != cls:
                continue
            dists = [chamfer_reference(el.points, g.points, interval) for g in frame_gts]
            entries.append((el.confidence, order, frame, dists))
            order += 1
    entries.sort(key=lambda e: (-e[0], e[1]))
    taken: set[tuple[str, int]] = set()
    matched: list[float | None] = []
    for conf, order, frame, dists in entries:
        best = None
        for gi, d in enumerate(dists):
            if (frame, gi) in taken:
                continue
            if best is None or d < dists[best]:
                best = gi
        if best is None:
            matched.append(None)
        else:
            taken.add((frame, best))
            matched.append(dists[best])
    return matched, gt_total


def ap_from_reference_matches(matched, gt_total: int, tau: float) -> float | None:
    if gt_total == 0:
        return None
    if not matched:
        return 0.0
    tp_cum = 0
    precision = []
    recall = []
    for rank, dist in enumerate(matched, start=1):
        tp_cum += int(dist is not None and dist < tau)
        precision.append(tp_cum / rank)
        recall.append(tp_cum / gt_total)
    for i in range(len(precision) - 2, -1, -1):
        precision[i] = max(precision[i], precision[i + 1])
    area = 0.0
    prev = 0.0
    for p, r in zip(precision, recall):
        area += (r - prev) * p
        prev = r
    return area


def ap_reference(preds: dict[str, list[MapElement]], gts: dict[str, list[MapElement]],
                 tau: float, cls: str, interval=0.5) -> float | None:
    """Independent greedy matcher + all-point PR area."""
    matched, gt_total = match_reference(preds, gts, cls, interval)
    return ap_from_reference_matches(matched, gt_total, tau)


def random_polyline(rng: random.Random, max_points=6, scale=10.0):
    n = rng.randint(2, max_points)
    pts = []
    while len(pts) < n:
        p = (rng.uniform(-scale, scale), rng.uniform(-scale, scale))
        if not pts or p != pts[-1]:
            pts.append(p)
    return pts


def random_eval_instance(rng: random.Random, cls="divider", max_preds=5, max_gts=4,
                         frames=1):
    preds: dict[str, list[MapElement]] = {}
    gts: dict[str, list[MapElement]] = {}
    for k in range(frames):
        frame = f"f{k}"
        gts[frame] = [MapElement(frame_id=frame, cls=cls,
                                 points=tuple(random_polyline(rng)))
                      for _ in range(rng.randint(0, max_gts))]
        preds[frame] = [MapElement(frame_id=frame, cls=cls,
                                   points=tuple(random_polyline(rng)),
                                   confidence=rng.random())
                        for _ in range(rng.randint(0, max_preds))]
    return preds, gts


# ---------------------------------------------------------------------------
# Planted-leakage generator

def planted_leakage_dataset(fraction: float, n_val: int = 500, spacing: float = 1000.0):
    """Train anchors on a line; a chosen fraction of val samples sit 3 m from
    an anchor, the rest at least 50 m from every train sample."""
    from geosplit.leakage import SplitAssignment

    n_planted = round(fraction * n_val)
    samples = []
    assignment = {}
    for i in range(n_val):
        sid = f"t{i}"
        samples.append(Sample(id=sid, sequence_id=f"qt{i}", map_id="m0",
                              x=i * spacing, y=0.0, t=i, keyframe=True, attrs={}))
        assignment[sid] = "train"
    for i in range(n_val):
        sid = f"v{i}"
        if i < n_planted:
            x, y = i * spacing + 3.0, 0.0
        else:
            x, y = i * spacing + spacing / 2.0, 300.0
        samples.append(Sample(id=sid, sequence_id=f"qv{i}", map_id="m0",
                              x=x, y=y, t=i, keyframe=True, attrs={}))
        assignment[sid] = "val"
    ds = Dataset.from_samples(samples)
    return ds, SplitAssignment(assignment=assignment, provenance=f"planted({fraction})")


@pytest.fixture
def rng():
    return random.Random(20240817)
