"""Assignment and losses: CIoU + distribution focal + BCE classification.

A static center-cell assigner: each ground-truth box claims the cell
containing its center at the level whose stride best fits the box size.
Enough signal for small transfer/fine-tune runs without the machinery of
a dynamic assigner.
"""

from __future__ import annotations

import math

import torch
import torch.nn.functional as F

from trainkit.model import Decoder

GAIN_BOX = 7.5
GAIN_CLS = 0.5
GAIN_DFL = 1.5


def pick_level(box_w: float, box_h: float, strides) -> int:
    """Level whose stride is nearest to max(w, h) / 8 in log space."""
    size = max(box_w, box_h, 1e-6)
    best, best_gap = 0, float("inf")
    for i, s in enumerate(strides):
        gap = abs(math.log2(size / (8.0 * s)))
        if gap < best_gap:
            best, best_gap = i, gap
    return best


def assign_targets(
    batch_boxes: list[torch.Tensor], size: int, strides, reg_max: int, nc: int
):
    """Map GT boxes to (image, anchor) slots.

    Returns flat index tensors plus per-positive distance/class targets;
    anchors are indexed over the concatenated level layout.
    """
    level_offsets = []
    offset = 0
    for s in strides:
        level_offsets.append(offset)
        offset += (size // s) ** 2
    total_anchors = offset

    img_idx, anchor_idx, classes, dist_targets, gt_boxes = [], [], [], [], []
    for b, boxes in enumerate(batch_boxes):
        taken = set()
        for row in boxes:
            class_id = int(row[0])
            cx, cy, w, h = (float(v) for v in row[1:5])
            level = pick_level(w, h, strides)
            s = strides[level]
            g = size // s
            j = min(max(int(cx // s), 0), g - 1)
            i = min(max(int(cy // s), 0), g - 1)
            anchor = level_offsets[level] + i * g + j
            if (b, anchor) in taken:
                continue
            taken.add((b, anchor))
            ax, ay = (j + 0.5) * s, (i + 0.5) * s
            x1, y1 = cx - w / 2, cy - h / 2
            x2, y2 = cx + w / 2, cy + h / 2
            limit = reg_max - 1 - 1e-3
            dist = [
                min(max((ax - x1) / s, 0.0), limit),
                min(max((ay - y1) / s, 0.0), limit),
                min(max((x2 - ax) / s, 0.0), limit),
                min(max((y2 - ay) / s, 0.0), limit),
            ]
            img_idx.append(b)
            anchor_idx.append(anchor)
            classes.append(class_id)
            dist_targets.append(dist)
            gt_boxes.append([x1, y1, x2, y2])

    return {
        "total_anchors": total_anchors,
        "img_idx": torch.tensor(img_idx, dtype=torch.long),
        "anchor_idx": torch.tensor(anchor_idx, dtype=torch.long),
        "classes": torch.tensor(classes, dtype=torch.long),
        "dist": torch.tensor(dist_targets, dtype=torch.float32),
        "boxes": torch.tensor(gt_boxes, dtype=torch.float32),
    }


def ciou_loss(pred_xyxy: torch.Tensor, gt_xyxy: torch.Tensor) -> torch.Tensor:
    """1 - CIoU per box pair; inputs (n, 4)."""
    px1, py1, px2, py2 = pred_xyxy.unbind(1)
    gx1, gy1, gx2, gy2 = gt_xyxy.unbind(1)
    inter_w = (torch.min(px2, gx2) - torch.max(px1, gx1)).clamp(min=0)
    inter_h = (torch.min(py2, gy2) - torch.max(py1, gy1)).clamp(min=0)
    inter = inter_w * inter_h
    union = (px2 - px1) * (py2 - py1) + (gx2 - gx1) * (gy2 - gy1) - inter
    iou = inter / (union + 1e-9)

    rho2 = ((px1 + px2 - gx1 - gx2) ** 2 + (py1 + py2 - gy1 - gy2) ** 2) / 4.0
    cw = torch.max(px2, gx2) - torch.min(px1, gx1)
    ch = torch.max(py2, gy2) - torch.min(py1, gy1)
    c2 = cw**2 + ch**2 + 1e-9
    v = (4 / math.pi**2) * (
        torch.atan((px2 - px1) / (py2 - py1 + 1e-9)) - torch.atan((gx2 - gx1) / (gy2 - gy1 + 1e-9))
    ) ** 2
    with torch.no_grad():
        alpha = v / ((1 - iou) + v + 1e-9)
    return 1.0 - (iou - rho2 / c2 - alpha * v)


def dfl_loss(reg_logits: torch.Tensor, dist_targets: torch.Tensor) -> torch.Tensor:
    """Cross-entropy onto the two bins bracketing each target distance.

    reg_logits: (n, 4, reg_max); dist_targets: (n, 4).
    """
    n, four, reg_max = reg_logits.shape
    logits = reg_logits.reshape(n * four, reg_max)
    target = dist_targets.reshape(n * four)
    lower = target.floor().long().clamp(0, reg_max - 1)
    upper = (lower + 1).clamp(0, reg_max - 1)
    weight_upper = target - lower.float()
    weight_lower = 1.0 - weight_upper
    loss = F.cross_entropy(logits, lower, reduction="none") * weight_lower
    loss = loss + F.cross_entropy(logits, upper, reduction="none") * weight_upper
    return loss.mean()


def detection_loss(
    levels: list[torch.Tensor],
    batch_boxes: list[torch.Tensor],
    decoder: Decoder,
    size: int,
    strides,
) -> dict[str, torch.Tensor]:
    """Box/cls/dfl components plus their weighted total.

    Zero-GT batches still train: classification logits are pushed toward
    silence everywhere while box/dfl terms drop out.
    """
    reg_max, nc = decoder.reg_max, decoder.nc
    flat = torch.cat([level.flatten(2) for level in levels], dim=2)  # (B, C, A)
    reg, cls = flat.split([4 * reg_max, nc], dim=1)
    batch, _, anchors = cls.shape

    targets = assign_targets(batch_boxes, size, strides, reg_max, nc)
    n_pos = len(targets["img_idx"])

    cls_target = torch.zeros_like(cls)
    if n_pos:
        cls_target[targets["img_idx"], targets["classes"], targets["anchor_idx"]] = 1.0
    loss_cls = F.binary_cross_entropy_with_logits(cls, cls_target, reduction="sum") / max(1, n_pos)

    if n_pos:
        pos_reg = reg[targets["img_idx"], :, targets["anchor_idx"]].view(n_pos, 4, reg_max)
        loss_dfl = dfl_loss(pos_reg, targets["dist"])

        probs = pos_reg.softmax(dim=2)
        proj = torch.arange(reg_max, dtype=torch.float32, device=probs.device)
        dist = (probs * proj.view(1, 1, reg_max)).sum(dim=2)  # (n, 4) in bin units
        points = decoder.points[targets["anchor_idx"]]
        anchor_strides = decoder.anchor_strides[targets["anchor_idx"]].unsqueeze(1)
        dist = dist * anchor_strides
        pred = torch.cat([points - dist[:, :2], points + dist[:, 2:]], dim=1)
        loss_box = ciou_loss(pred, targets["boxes"]).mean()
    else:
        loss_dfl = cls.sum() * 0.0
        loss_box = cls.sum() * 0.0

    total = GAIN_BOX * loss_box + GAIN_CLS * loss_cls + GAIN_DFL * loss_dfl
    return {"box": loss_box, "cls": loss_cls, "dfl": loss_dfl, "total": total}
