import math
import random

import numpy as np
import pytest

from geosplit.errors import MissingConfidenceError, ShapeMismatchError
from geosplit.ingest import MapElement
from geosplit.mapeval import (
    RasterSpec,
    ap_at_threshold,
    chamfer,
    evaluate,
    iou,
    match_elements,
    rasterize,
    resample_polyline,
)

from conftest import ap_reference, chamfer_reference, random_eval_instance, random_polyline


def el(points, cls="divider", frame="f0", conf=None):
    return MapElement(frame_id=frame, cls=cls, points=tuple(points), confidence=conf)


# ---------------------------------------------------------------------------
# Chamfer

def test_resample_keeps_endpoints():
    pts = resample_polyline([(0, 0), (1, 0)], 0.4)
    assert tuple(pts[0]) == (0, 0)
    assert tuple(pts[-1]) == (1, 0)
    assert [round(p[0], 6) for p in pts] == [0.0, 0.4, 0.8, 1.0]


def test_chamfer_identical_zero():
    line = [(0, 0), (3, 4), (10, 4)]
    assert chamfer(line, line) == 0.0


def test_chamfer_parallel_offset():
    a = [(0.0, 0.0), (10.0, 0.0)]
    b = [(0.0, 2.0), (10.0, 2.0)]
    assert chamfer(a, b) == pytest.approx(2.0, abs=1e-12)


def test_chamfer_symmetric():
    rng = random.Random(71)
    for _ in range(20):
        a = random_polyline(rng)
        b = random_polyline(rng)
        assert chamfer(a, b) == pytest.approx(chamfer(b, a), abs=1e-12)


def test_chamfer_matches_reference():
    rng = random.Random(73)
    for _ in range(100):
        a = random_polyline(rng)
        b = random_polyline(rng)
        assert chamfer(a, b) == pytest.approx(chamfer_reference(a, b), abs=1e-12)


def test_chamfer_translation_invariant():
    rng = random.Random(79)
    for _ in range(20):
        a = random_polyline(rng)
        b = random_polyline(rng)
        dx, dy = rng.uniform(-50, 50), rng.uniform(-50, 50)
        a2 = [(x + dx, y + dy) for x, y in a]
        b2 = [(x + dx, y + dy) for x, y in b]
        assert chamfer(a2, b2) == pytest.approx(chamfer(a, b), abs=1e-9)


# ---------------------------------------------------------------------------
# Matching and AP

def test_perfect_predictions_ap_one():
    gts = {"f0": [el([(0, 0), (5, 0)]), el([(0, 2), (5, 2)])]}
    preds = {"f0": [el([(0, 0), (5, 0)], conf=0.9), el([(0, 2), (5, 2)], conf=0.8)]}
    assert ap_at_threshold(preds, gts, 0.5, "divider") == 1.0


def test_no_predictions_ap_zero():
    gts = {"f0": [el([(0, 0), (5, 0)])]}
    assert ap_at_threshold({}, gts, 0.5, "divider") == 0.0


def test_no_ground_truth_ap_none():
    preds = {"f0": [el([(0, 0), (5, 0)], conf=0.9)]}
    assert ap_at_threshold(preds, {"f0": []}, 0.5, "divider") is None


def test_missing_confidence_raises():
    gts = {"f0": [el([(0, 0), (5, 0)])]}
    preds = {"f0": [el([(0, 0), (5, 0)])]}
    with pytest.raises(MissingConfidenceError):
        ap_at_threshold(preds, gts, 0.5, "divider")


def test_unknown_pred_frame_rejected():
    gts = {"f0": [el([(0, 0), (5, 0)])]}
    preds = {"f1": [el([(0, 0), (5, 0)], conf=0.5, frame="f1")]}
    with pytest.raises(ValueError):
        match_elements(preds, gts)


def test_matching_consumes_gt_once():
    gts = {"f0": [el([(0, 0), (5, 0)])]}
    preds = {"f0": [el([(0, 0.1), (5, 0.1)], conf=0.9),
                    el([(0, 0.2), (5, 0.2)], conf=0.8)]}
    result = match_elements(preds, gts)
    matched = [m.gt_index for m in result.matches["divider"]]
    assert matched == [0, None]  # higher confidence takes the only GT


def test_matching_is_threshold_free():
    # The far prediction still consumes the GT; thresholds only flag TPs.
    gts = {"f0": [el([(0, 0), (5, 0)])]}
    preds = {"f0": [el([(0, 30), (5, 30)], conf=0.9)]}
    assert ap_at_threshold(preds, gts, 0.5, "divider") == 0.0
    assert ap_at_threshold(preds, gts, 50.0, "divider") == 1.0


def test_ap_matches_reference_random():
    rng = random.Random(83)
    for _ in range(60):
        preds, gts = random_eval_instance(rng, frames=rng.randint(1, 2))
        for tau in (0.5, 1.0, 1.5):
            ours = ap_at_threshold(preds, gts, tau, "divider")
            ref = ap_reference(preds, gts, tau, "divider")
            if ref is None:
                assert ours is None
            else:
                assert ours == pytest.approx(ref, abs=1e-9)


def test_ap_monotone_in_threshold():
    rng = random.Random(89)
    for _ in range(30):
        preds, gts = random_eval_instance(rng)
        values = [ap_at_threshold(preds, gts, tau, "divider") for tau in (0.5, 1.0, 1.5)]
        defined = [v for v in values if v is not None]
        assert defined == sorted(defined)


def test_confidence_scaling_invariance():
    rng = random.Random(97)
    preds, gts = random_eval_instance(rng, max_preds=5, max_gts=4)
    scaled = {
        f: [MapElement(frame_id=e.frame_id, cls=e.cls, points=e.points,
                       confidence=e.confidence * 0.25) for e in elements]
        for f, elements in preds.items()
    }
    for tau in (0.5, 1.5):
        assert ap_at_threshold(preds, gts, tau, "divider") == \
            ap_at_threshold(scaled, gts, tau, "divider")


def test_evaluate_mean_identities():
    rng = random.Random(101)
    preds, gts = random_eval_instance(rng, frames=3)
    report = evaluate(preds, gts)
    for c, values in report.ap.items():
        if values[0] is None:
            assert report.class_map[c] is None
        else:
            assert report.class_map[c] == sum(values) / len(values)
    defined = [m for m in report.class_map.values() if m is not None]
    assert report.mean_map == sum(defined) / len(defined)


def test_evaluate_trivial_mean():
    gts = {"f0": [el([(0, 0), (5, 0)])]}
    preds = {"f0": [el([(0, 0), (5, 0)], conf=1.0)]}
    report = evaluate(preds, gts, thresholds=(0.5, 1.0, 1.5))
    assert report.ap["divider"] == (1.0, 1.0, 1.0)
    assert report.class_map["divider"] == 1.0
    assert report.mean_map == 1.0
    assert report.to_json_dict()["classes_without_gt"] == ["boundary", "crossing"]


def test_evaluate_class_absent_excluded():
    gts = {"f0": [el([(0, 0), (5, 0)], cls="divider")]}
    preds = {"f0": [el([(0, 0), (5, 0)], cls="divider", conf=1.0),
                    el([(0, 1), (5, 1)], cls="crossing", conf=0.9)]}
    report = evaluate(preds, gts)
    assert report.class_map["crossing"] is None
    assert report.mean_map == 1.0


def test_evaluate_missing_pred_frames_are_zero_predictions():
    gts = {"f0": [el([(0, 0), (5, 0)])], "f1": [el([(0, 0), (5, 0)], frame="f1")]}
    preds = {"f0": [el([(0, 0), (5, 0)], conf=1.0)]}
    report = evaluate(preds, gts)
    # One of two GT elements recalled: AP = 0.5 at every threshold.
    assert report.ap["divider"] == (0.5, 0.5, 0.5)


def test_hand_set_matching_example():
    # Three predictions, two GTs; confidences force p1 -> g0, p0 -> g1.
    gts = {"f0": [el([(0.0, 0.0), (4.0, 0.0)]), el([(0.0, 10.0), (4.0, 10.0)])]}
    preds = {"f0": [
        el([(0.0, 0.4), (4.0, 0.4)], conf=0.5),    # 0.4 from g0, 9.6 from g1
        el([(0.0, 0.1), (4.0, 0.1)], conf=0.9),    # takes g0 first (0.1)
        el([(0.0, 20.0), (4.0, 20.0)], conf=0.1),  # 10 from g1 after g1 taken -> unmatched
    ]}
    result = match_elements(preds, gts)
    by_pred = {m.pred_index: m for m in result.matches["divider"]}
    assert by_pred[1].gt_index == 0
    assert by_pred[0].gt_index == 1  # g0 taken, falls back to g1 at 9.6
    assert by_pred[2].gt_index is None
    # tau=1: TP sequence by confidence is [TP(0.1), FP(9.6), FP]; AP = 0.5
    assert ap_at_threshold(preds, gts, 1.0, "divider") == pytest.approx(0.5)
    assert ap_at_threshold(preds, gts, 1.0, "divider") == pytest.approx(
        ap_reference(preds, gts, 1.0, "divider"))


# ---------------------------------------------------------------------------
# Rasterization and IoU

def test_rasterize_empty_frame():
    masks = rasterize([], RasterSpec())
    assert all(not m.any() for m in masks.values())
    assert masks["divider"].shape == (200, 400)


def test_rasterize_horizontal_band():
    spec = RasterSpec(x_min=-30, x_max=30, y_min=-15, y_max=15, resolution=0.15,
                      half_width=0.5)
    masks = rasterize([el([(-30.0, 0.0), (30.0, 0.0)])], spec)
    mask = masks["divider"]
    cols = mask.any(axis=0)
    assert cols.all()
    band = mask[:, 200]
    expected = round(2 * spec.half_width / spec.resolution)
    assert abs(int(band.sum()) - expected) <= 1


def test_rasterize_translation_equivariance():
    spec = RasterSpec()
    pts = [(-10.25, -3.5), (0.5, 2.75), (12.0, 6.5)]
    base = rasterize([el(pts)], spec)
    delta = 7.25  # binary-exact shift
    shifted_spec = RasterSpec(x_min=spec.x_min + delta, x_max=spec.x_max + delta,
                              y_min=spec.y_min + delta, y_max=spec.y_max + delta)
    shifted = rasterize([el([(x + delta, y + delta) for x, y in pts])], shifted_spec)
    for c in base:
        assert np.array_equal(base[c], shifted[c])


def test_rasterize_clips_outside():
    masks = rasterize([el([(100.0, 100.0), (120.0, 100.0)])], RasterSpec())
    assert not masks["divider"].any()


def test_iou_cases():
    a = np.zeros((4, 4), dtype=bool)
    a[0:2, 0:2] = True
    assert iou(a, a) == 1.0
    b = np.zeros((4, 4), dtype=bool)
    b[2:4, 2:4] = True
    assert iou(a, b) == 0.0
    c = np.zeros((4, 4), dtype=bool)
    c[0:2, 1:3] = True  # half-overlapping equal-area rectangles
    assert iou(a, c) == pytest.approx(1 / 3)
    empty = np.zeros((4, 4), dtype=bool)
    assert iou(empty, empty) == 1.0


def test_iou_symmetry_and_bounds():
    rng = np.random.default_rng(5)
    for _ in range(20):
        a = rng.random((8, 8)) > 0.5
        b = rng.random((8, 8)) > 0.5
        v = iou(a, b)
        assert v == iou(b, a)
        assert 0.0 <= v <= 1.0


def test_iou_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        iou(np.zeros((2, 2), dtype=bool), np.zeros((3, 2), dtype=bool))


def test_raster_spec_validation():
    with pytest.raises(ValueError):
        RasterSpec(x_min=10, x_max=-10).validate()
    with pytest.raises(ValueError):
        RasterSpec(resolution=0).validate()
