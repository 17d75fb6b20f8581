"""Per-level segmentation quality and hierarchy-consistency measurement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hierarchy import Hierarchy
from .inference import PathPrediction
from .rules import LabelMap, ScoreMap


@dataclass
class EvalReport:
    """Per-level mIoU (percent), per-class IoU, and consistency numbers.

    ``miou_per_level[l-1]`` is the mean IoU over level-l classes that occur
    in ground truth or prediction, scaled to [0, 100].  ``per_class_iou``
    maps node name to IoU in [0, 1], or None for classes absent from both.
    ``violation_rate`` is the fraction of pixels whose independent
    per-level argmaxes do not form a valid path (0.0 when no pre-decode
    scores were supplied).
    """

    miou_per_level: list[float]
    per_class_iou: dict[str, float | None]
    violation_rate: float
    pixel_count: int

    def to_dict(self) -> dict:
        return {
            "miou_per_level": [round(x, 2) for x in self.miou_per_level],
            "per_class_iou": {
                name: (None if iou is None else float(iou))
                for name, iou in self.per_class_iou.items()
            },
            "violation_rate": self.violation_rate,
            "pixel_count": self.pixel_count,
        }


def _level_confusion(pred_ids, gt_ids, start, count):
    """Confusion matrix of one level, classes indexed within the level."""
    p = pred_ids - start
    g = gt_ids - start
    return np.bincount(g * count + p, minlength=count * count).reshape(count, count)


def evaluate(
    pred: PathPrediction,
    gt: LabelMap,
    h: Hierarchy,
    scores: ScoreMap | None = None,
) -> EvalReport:
    """Score a decoded prediction against ground truth, level by level.

    At level l the prediction is the path's level-l node and the ground
    truth is the label's level-l ancestor.  IoU per class is
    TP / (TP + FP + FN); the level mean covers classes present in ground
    truth or prediction.  Pass the pre-decode ``scores`` to also report the
    violation rate of the raw per-level argmaxes.
    """
    if pred.num_pixels != gt.num_pixels:
        raise ValueError(
            f"prediction pixels ({pred.num_pixels}) != label pixels ({gt.num_pixels})"
        )
    gt_nodes = gt.path_nodes()
    miou = []
    per_class: dict[str, float | None] = {}
    for lv in range(1, h.num_levels + 1):
        start = int(h.level_starts[lv - 1])
        count = int(h.level_sizes[lv - 1])
        conf = _level_confusion(pred.nodes[lv - 1], gt_nodes[lv - 1], start, count)
        tp = np.diag(conf).astype(np.float64)
        fp = conf.sum(axis=0) - tp
        fn = conf.sum(axis=1) - tp
        union = tp + fp + fn
        present = union > 0
        iou = np.zeros(count)
        iou[present] = tp[present] / union[present]
        for i in range(count):
            name = h.names[start + i]
            per_class[name] = float(iou[i]) if present[i] else None
        miou.append(100.0 * float(iou[present].mean()) if present.any() else 0.0)
    vr = violation_rate(scores, h) if scores is not None else 0.0
    return EvalReport(
        miou_per_level=miou,
        per_class_iou=per_class,
        violation_rate=vr,
        pixel_count=pred.num_pixels,
    )


def evaluate_leaves(
    pred_leaf_ids, gt: LabelMap, h: Hierarchy, scores: ScoreMap | None = None
) -> EvalReport:
    """Evaluate a leaf-only prediction by merging it up the tree.

    Coarse-level predictions are the ancestors of the predicted leaf, the
    standard way to score a flat classifier against a hierarchy.
    """
    leaf = np.ascontiguousarray(pred_leaf_ids, dtype=np.int64).ravel()
    if leaf.size and (leaf.min() < 0 or leaf.max() >= h.num_leaves):
        raise ValueError("leaf prediction outside the leaf id range")
    nodes = np.empty((h.num_levels, leaf.size), dtype=np.int64)
    cur = leaf
    for lv in range(h.num_levels):
        nodes[lv] = cur
        cur = h.parent_index[cur]
    vals = np.zeros(leaf.size)
    pred = PathPrediction(nodes=nodes, score=vals, hierarchy=h)
    return evaluate(pred, gt, h, scores=scores)


def violation_rate(s: ScoreMap, h: Hierarchy) -> float:
    """Fraction of pixels whose per-level argmaxes are not a valid path."""
    vals = s.values
    prev = None
    ok = np.ones(vals.shape[1], dtype=bool)
    for lv in range(1, h.num_levels + 1):
        start = int(h.level_starts[lv - 1])
        count = int(h.level_sizes[lv - 1])
        arg = start + np.argmax(vals[start : start + count], axis=0)
        if prev is not None:
            ok &= h.parent_index[prev] == arg
        prev = arg
    return float(1.0 - ok.mean())
