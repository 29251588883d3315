"""Average precision and mAP over IoU thresholds."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from mslkit.decode import Detection
from mslkit.evaluation.matching import GroundTruth, match

COCO_THRESHOLDS = tuple(round(0.5 + 0.05 * k, 2) for k in range(10))  # 0.50 .. 0.95


def average_precision(tp_flags: Sequence[bool], n_gt: int) -> float | None:
    """All-points interpolated AP from score-ordered TP flags.

    The precision curve is made monotone non-increasing (its envelope)
    and integrated over recall. No ground truth and no predictions means
    AP is undefined (None, excluded from mAP); predictions against zero
    ground truth score 0.
    """
    if n_gt < 0:
        raise ValueError("n_gt must be >= 0")
    if n_gt == 0:
        return None if len(tp_flags) == 0 else 0.0
    if len(tp_flags) == 0:
        return 0.0

    flags = np.asarray(tp_flags, dtype=bool)
    tp = np.cumsum(flags)
    fp = np.cumsum(~flags)
    recall = tp / n_gt
    precision = tp / (tp + fp)

    mrec = np.concatenate(([0.0], recall, [1.0]))
    mpre = np.concatenate(([0.0], precision, [0.0]))
    for i in range(len(mpre) - 2, -1, -1):
        mpre[i] = max(mpre[i], mpre[i + 1])
    changed = np.where(mrec[1:] != mrec[:-1])[0]
    return float(np.sum((mrec[changed + 1] - mrec[changed]) * mpre[changed + 1]))


@dataclass
class MapResult:
    thresholds: tuple[float, ...]
    per_class_ap: dict[float, list[float | None]]  # threshold -> AP per class
    map_by_threshold: dict[float, float]
    map50: float
    map50_95: float
    precision: float  # at the first threshold, over all supplied predictions
    recall: float
    n_predictions: int
    n_gts: int


def map_at(
    preds_by_image: Sequence[Sequence[Detection]],
    gts_by_image: Sequence[Sequence[GroundTruth]],
    nc: int,
    thresholds: Sequence[float] = COCO_THRESHOLDS,
) -> MapResult:
    """Per-class AP at each IoU threshold, averaged into mAP50 / mAP50-95.

    Predictions pool across images per class, sorted by score with ties
    broken by image order then within-image order (AP is tie-sensitive,
    so the order is pinned).
    """
    if len(preds_by_image) != len(gts_by_image):
        raise ValueError("preds and gts must cover the same images")
    thresholds = tuple(thresholds)

    n_gt_per_class = [0] * nc
    for gts in gts_by_image:
        for gt_class, _ in gts:
            n_gt_per_class[gt_class] += 1

    per_class_ap: dict[float, list[float | None]] = {}
    map_by_threshold: dict[float, float] = {}
    tp_total_first = 0
    n_preds = sum(len(p) for p in preds_by_image)

    for threshold in thresholds:
        # records: (score, image index, within-image index, class, tp flag)
        records = []
        for img_idx, (preds, gts) in enumerate(zip(preds_by_image, gts_by_image)):
            result = match(list(preds), list(gts), threshold)
            for k, pred in enumerate(preds):
                records.append((pred.score, img_idx, k, pred.class_id, result.pred_tp[k]))
        if threshold == thresholds[0]:
            tp_total_first = sum(1 for r in records if r[4])

        aps: list[float | None] = []
        for c in range(nc):
            class_records = [r for r in records if r[3] == c]
            class_records.sort(key=lambda r: (-r[0], r[1], r[2]))
            aps.append(average_precision([r[4] for r in class_records], n_gt_per_class[c]))
        per_class_ap[threshold] = aps
        defined = [a for a in aps if a is not None]
        map_by_threshold[threshold] = float(np.mean(defined)) if defined else 0.0

    map50 = map_by_threshold.get(0.5, map_by_threshold[thresholds[0]])
    map50_95 = float(np.mean([map_by_threshold[t] for t in thresholds]))
    n_gts = sum(n_gt_per_class)
    return MapResult(
        thresholds=thresholds,
        per_class_ap=per_class_ap,
        map_by_threshold=map_by_threshold,
        map50=map50,
        map50_95=map50_95,
        precision=tp_total_first / n_preds if n_preds else 0.0,
        recall=tp_total_first / n_gts if n_gts else 0.0,
        n_predictions=n_preds,
        n_gts=n_gts,
    )
