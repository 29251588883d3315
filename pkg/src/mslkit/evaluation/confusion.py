"""Background-aware confusion matrix for detections.

Rows are predicted classes, columns are ground-truth classes, and index
nc is the background: missed GTs land in row nc, unmatched predictions
in column nc. Matching is class-agnostic (IoU only), mirroring the
common detection-tooling convention, so cross-class confusions show up
off the diagonal.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from mslkit.decode import Detection
from mslkit.evaluation.matching import GroundTruth
from mslkit.geometry import iou


def confusion_matrix(
    preds_by_image: Sequence[Sequence[Detection]],
    gts_by_image: Sequence[Sequence[GroundTruth]],
    nc: int,
    conf: float = 0.25,
    iou_threshold: float = 0.45,
) -> np.ndarray:
    """(nc+1) x (nc+1) count matrix, cell (pred_class, gt_class)."""
    matrix = np.zeros((nc + 1, nc + 1), dtype=np.int64)
    for preds, gts in zip(preds_by_image, gts_by_image):
        kept = [p for p in preds if p.score >= conf]

        pairs = []
        for i, pred in enumerate(kept):
            for j, (_, gt_box) in enumerate(gts):
                overlap = iou(pred.box, gt_box)
                if overlap >= iou_threshold:
                    pairs.append((overlap, i, j))
        pairs.sort(key=lambda t: (-t[0], t[1], t[2]))

        pred_used = [False] * len(kept)
        gt_used = [False] * len(gts)
        for _, i, j in pairs:
            if pred_used[i] or gt_used[j]:
                continue
            pred_used[i] = True
            gt_used[j] = True
            matrix[kept[i].class_id, gts[j][0]] += 1
        for i, used in enumerate(pred_used):
            if not used:
                matrix[kept[i].class_id, nc] += 1
        for j, used in enumerate(gt_used):
            if not used:
                matrix[nc, gts[j][0]] += 1
    return matrix


def normalize_confusion(matrix: np.ndarray) -> np.ndarray:
    """Column-normalized view: each GT column divided by its sum."""
    matrix = np.asarray(matrix, dtype=np.float64)
    sums = matrix.sum(axis=0, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        normalized = np.where(sums > 0, matrix / sums, 0.0)
    return normalized
