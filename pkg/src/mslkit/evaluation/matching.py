"""Greedy VOC-style matching of predictions to ground truth."""

from __future__ import annotations

from dataclasses import dataclass

from mslkit.decode import Detection
from mslkit.geometry import PixelBox, iou

GroundTruth = tuple[int, PixelBox]  # (class_id, box)


@dataclass
class MatchResult:
    """Per-prediction TP flags (input order), matched GT indices, and
    per-GT matched flags."""

    pred_tp: list[bool]
    pred_gt_index: list[int | None]
    gt_matched: list[bool]
    iou_threshold: float


def match(preds: list[Detection], gts: list[GroundTruth], iou_threshold: float = 0.5) -> MatchResult:
    """In descending score order, each prediction claims the unclaimed
    same-class GT with the highest IoU >= threshold; ties on IoU go to the
    lower GT index. Each GT is claimed at most once."""
    order = sorted(range(len(preds)), key=lambda i: (-preds[i].score, i))
    pred_tp = [False] * len(preds)
    pred_gt_index: list[int | None] = [None] * len(preds)
    gt_matched = [False] * len(gts)

    for i in order:
        pred = preds[i]
        best_j = None
        best_iou = 0.0
        for j, (gt_class, gt_box) in enumerate(gts):
            if gt_matched[j] or gt_class != pred.class_id:
                continue
            overlap = iou(pred.box, gt_box)
            if overlap >= iou_threshold and overlap > best_iou:
                best_iou = overlap
                best_j = j
        if best_j is not None:
            pred_tp[i] = True
            pred_gt_index[i] = best_j
            gt_matched[best_j] = True

    return MatchResult(pred_tp, pred_gt_index, gt_matched, iou_threshold)
