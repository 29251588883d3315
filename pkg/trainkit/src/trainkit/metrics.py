"""Minimal validation metrics for the training log (P, R, mAP50, mAP50-95)."""

from __future__ import annotations

import numpy as np


def box_iou(a: np.ndarray, b: np.ndarray) -> float:
    iw = min(a[2], b[2]) - max(a[0], b[0])
    ih = min(a[3], b[3]) - max(a[1], b[1])
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter
    return float(inter / union) if union > 0 else 0.0


def simple_nms(boxes, scores, classes, iou_thr=0.45, max_det=300):
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    kept = []
    for i in order:
        if all(
            classes[i] != classes[j] or box_iou(boxes[i], boxes[j]) < iou_thr for j in kept
        ):
            kept.append(i)
            if len(kept) >= max_det:
                break
    return kept


def decode_predictions(pre: np.ndarray, conf=0.25, iou_thr=0.45):
    """(4+nc, A) pretransformed tensor -> (boxes xyxy, scores, classes)."""
    nc = pre.shape[0] - 4
    cls_idx, anchor_idx = np.nonzero(pre[4:] > conf)
    boxes, scores, classes = [], [], []
    for c, a in zip(cls_idx, anchor_idx):
        cx, cy, w, h = pre[:4, a]
        boxes.append([cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2])
        scores.append(float(pre[4 + c, a]))
        classes.append(int(c))
    kept = simple_nms(boxes, scores, classes, iou_thr)
    return [boxes[i] for i in kept], [scores[i] for i in kept], [classes[i] for i in kept]


def ap_from_flags(flags, n_gt):
    if n_gt == 0:
        return None if not flags else 0.0
    if not flags:
        return 0.0
    tp = np.cumsum(flags)
    fp = np.cumsum([not f for f in flags])
    recall = tp / n_gt
    precision = tp / (tp + fp)
    mrec = np.concatenate(([0.0], recall, [1.0]))
    mpre = np.concatenate(([0.0], precision, [0.0]))
    for i in range(len(mpre) - 2, -1, -1):
        mpre[i] = max(mpre[i], mpre[i + 1])
    idx = np.where(mrec[1:] != mrec[:-1])[0]
    return float(np.sum((mrec[idx + 1] - mrec[idx]) * mpre[idx + 1]))


def evaluate_split(predictions, ground_truths, nc, thresholds=None):
    """predictions: per image (boxes, scores, classes); ground_truths: per
    image (boxes xyxy, classes). Returns precision, recall, map50, map50_95."""
    if thresholds is None:
        thresholds = [0.5 + 0.05 * k for k in range(10)]

    n_gt_per_class = [0] * nc
    for _, gt_classes in ground_truths:
        for c in gt_classes:
            n_gt_per_class[c] += 1

    maps = []
    precision = recall = 0.0
    for t_i, threshold in enumerate(thresholds):
        records = {c: [] for c in range(nc)}
        tp_total = 0
        pred_total = 0
        for (boxes, scores, classes), (gt_boxes, gt_classes) in zip(predictions, ground_truths):
            order = sorted(range(len(scores)), key=lambda i: -scores[i])
            claimed = [False] * len(gt_boxes)
            pred_total += len(order)
            for i in order:
                best_j, best_iou = None, threshold
                for j, (gb, gc) in enumerate(zip(gt_boxes, gt_classes)):
                    if claimed[j] or gc != classes[i]:
                        continue
                    overlap = box_iou(boxes[i], gb)
                    if overlap >= best_iou:
                        best_j, best_iou = j, overlap
                tp = best_j is not None
                if tp:
                    claimed[best_j] = True
                    tp_total += 1
                records[classes[i]].append((scores[i], tp))
        aps = []
        for c in range(nc):
            records[c].sort(key=lambda r: -r[0])
            ap = ap_from_flags([tp for _, tp in records[c]], n_gt_per_class[c])
            if ap is not None:
                aps.append(ap)
        maps.append(float(np.mean(aps)) if aps else 0.0)
        if t_i == 0:
            n_gts = sum(n_gt_per_class)
            precision = tp_total / pred_total if pred_total else 0.0
            recall = tp_total / n_gts if n_gts else 0.0

    return {
        "precision": precision,
        "recall": recall,
        "map50": maps[0],
        "map50_95": float(np.mean(maps)),
    }
