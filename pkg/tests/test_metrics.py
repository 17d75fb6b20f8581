import numpy as np
import pytest

from hierlogic import (
    LabelMap,
    PathPrediction,
    ScoreMap,
    decode_path,
    evaluate,
    evaluate_leaves,
    violation_rate,
)

from helpers import closure_scores, make_random_hierarchy, random_scores


def _pred_from_leaves(h, leaves):
    labels = LabelMap(np.asarray(leaves, dtype=np.int64), h)
    nodes = labels.path_nodes()
    return PathPrediction(nodes=nodes, score=np.zeros(len(leaves)), hierarchy=h)


def test_perfect_prediction(six_node):
    h = six_node
    gt = LabelMap(np.array([0, 1, 2, 0]), h)
    pred = _pred_from_leaves(h, [0, 1, 2, 0])
    rep = evaluate(pred, gt, h)
    assert rep.miou_per_level == [pytest.approx(100.0)] * h.num_levels
    assert rep.violation_rate == 0.0
    assert rep.pixel_count == 4


def test_full_swap_zero_miou(six_node):
    # At the mid level the 6-node tree has two classes; swapping them on
    # every pixel zeroes all intersections at that level.
    h = six_node
    gt = LabelMap(np.array([0, 2]), h)   # mids b, c
    pred = _pred_from_leaves(h, [2, 0])  # mids c, b
    rep = evaluate(pred, gt, h)
    mid_level_miou = rep.miou_per_level[1]
    assert mid_level_miou == pytest.approx(0.0)


def test_hand_case_four_pixels(six_node):
    h = six_node
    gt = LabelMap(np.array([0, 0, 1, 2]), h)   # d, d, e, f
    pred = _pred_from_leaves(h, [0, 1, 1, 2])  # d, e, e, f
    rep = evaluate(pred, gt, h)
    # Leaf IoUs: d = 1/2, e = 1/2, f = 1/1 -> mean 2/3.
    assert rep.miou_per_level[0] == pytest.approx(200.0 / 3.0, abs=1e-9)
    assert rep.to_dict()["miou_per_level"][0] == 66.67
    assert rep.per_class_iou["d"] == pytest.approx(0.5)
    assert rep.per_class_iou["e"] == pytest.approx(0.5)
    assert rep.per_class_iou["f"] == pytest.approx(1.0)


def test_absent_classes_excluded(six_node):
    h = six_node
    gt = LabelMap(np.array([0, 0]), h)
    pred = _pred_from_leaves(h, [0, 0])
    rep = evaluate(pred, gt, h)
    # Only leaf d is present; e and f drop from the mean.
    assert rep.miou_per_level[0] == pytest.approx(100.0)
    assert rep.per_class_iou["e"] is None
    assert rep.per_class_iou["f"] is None


def test_pixel_permutation_invariance(rng):
    h = make_random_hierarchy(rng, max_levels=3, max_nodes=25)
    k = 40
    gt = LabelMap(rng.integers(h.num_leaves, size=k), h)
    pred_leaves = rng.integers(h.num_leaves, size=k)
    perm = rng.permutation(k)
    rep1 = evaluate(_pred_from_leaves(h, pred_leaves), gt, h)
    rep2 = evaluate(
        _pred_from_leaves(h, pred_leaves[perm]), LabelMap(gt.leaf_ids[perm], h), h
    )
    assert rep1.miou_per_level == rep2.miou_per_level
    assert rep1.per_class_iou == rep2.per_class_iou


def test_violation_rate_on_closures(any_fixture, rng):
    h = any_fixture
    leaves = rng.integers(h.num_leaves, size=9)
    assert violation_rate(closure_scores(h, leaves), h) == 0.0


def test_violation_rate_counts_broken_column(six_node):
    h = six_node
    nid = h.name_to_id
    vals = np.zeros((h.size, 2))
    # Pixel 0: argmaxes a, c, d -- d's parent is b, so the column violates.
    vals[[nid["a"], nid["c"], nid["d"]], 0] = 1.0
    # Pixel 1: consistent a, c, f.
    vals[[nid["a"], nid["c"], nid["f"]], 1] = 1.0
    assert violation_rate(ScoreMap(vals, h), h) == pytest.approx(0.5)


def test_decode_reencode_never_violates(rng):
    for _ in range(10):
        h = make_random_hierarchy(rng)
        s = random_scores(rng, h, 8)
        pred = decode_path(s, h)
        onehot = np.zeros((h.size, 8))
        for lv in range(h.num_levels):
            onehot[pred.nodes[lv], np.arange(8)] = 1.0
        assert violation_rate(ScoreMap(onehot, h), h) == 0.0


def test_evaluate_with_scores_reports_predecode_violations(six_node):
    h = six_node
    nid = h.name_to_id
    vals = np.zeros((h.size, 1))
    vals[[nid["a"], nid["c"], nid["d"]], 0] = 1.0
    s = ScoreMap(vals, h)
    pred = decode_path(s, h)
    gt = LabelMap(np.array([0]), h)
    rep = evaluate(pred, gt, h, scores=s)
    assert rep.violation_rate == 1.0


def test_evaluate_leaves_merge_mode(six_node):
    h = six_node
    gt = LabelMap(np.array([0, 1, 2]), h)
    rep = evaluate_leaves(np.array([0, 1, 2]), gt, h)
    assert rep.miou_per_level == [pytest.approx(100.0)] * h.num_levels
    # A leaf mistake within the same mid keeps the mid level perfect.
    rep = evaluate_leaves(np.array([1, 0, 2]), gt, h)
    assert rep.miou_per_level[0] < 100.0
    assert rep.miou_per_level[1] == pytest.approx(100.0)


def test_shape_mismatch_rejected(six_node):
    h = six_node
    gt = LabelMap(np.array([0, 1]), h)
    pred = _pred_from_leaves(h, [0])
    with pytest.raises(ValueError):
        evaluate(pred, gt, h)


def test_report_to_dict_schema(six_node):
    h = six_node
    gt = LabelMap(np.array([0, 1]), h)
    doc = evaluate(_pred_from_leaves(h, [0, 1]), gt, h).to_dict()
    assert sorted(doc) == [
        "miou_per_level",
        "per_class_iou",
        "pixel_count",
        "violation_rate",
    ]
    assert all(isinstance(v, float) or v is None for v in doc["per_class_iou"].values())
