"""Turn raw anchor-free detector head outputs into scored detections.

The head emits, per stride level, a (4*reg_max + nc) x (H/s) x (W/s)
logit tensor: four distance distributions (left/top/right/bottom of the
cell center, in stride units) followed by per-class logits. Decoding is
softmax-expectation over the distance bins, sigmoid over class logits,
thresholding, then greedy class-aware NMS.

Everything here is pure numpy and safe to call from multiple threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mslkit.errors import NotDivisibleError, ShapeMismatchError
from mslkit.geometry import PixelBox, iou

DEFAULT_STRIDES = (8, 16, 32)
DEFAULT_REG_MAX = 16


@dataclass(frozen=True)
class Detection:
    """One decoded object: box (letterboxed-input pixels until unmapped),
    class id, and confidence in (0, 1)."""

    box: PixelBox
    class_id: int
    score: float


@dataclass(frozen=True)
class DecodeConfig:
    conf_threshold: float = 0.25
    nms_iou_threshold: float = 0.45
    max_detections: int = 300
    class_aware: bool = True

    def __post_init__(self):
        for name in ("conf_threshold", "nms_iou_threshold"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} {value} outside (0, 1)")


@dataclass
class RawHeadOutput:
    """Per-stride head tensors, each (4*reg_max + nc, H/s, W/s) float logits."""

    tensors: dict[int, np.ndarray]
    reg_max: int = DEFAULT_REG_MAX
    nc: int = 20

    @property
    def strides(self) -> tuple[int, ...]:
        return tuple(sorted(self.tensors))

    def validate(self, input_w: int, input_h: int) -> None:
        channels = 4 * self.reg_max + self.nc
        for s, t in self.tensors.items():
            expect = (channels, input_h // s, input_w // s)
            if input_w % s or input_h % s:
                raise NotDivisibleError(f"input {input_w}x{input_h} not divisible by stride {s}")
            if t.shape != expect:
                raise ShapeMismatchError(f"stride {s}: shape {t.shape}, expected {expect}")

    def concat(self) -> np.ndarray:
        """All levels flattened row-major and joined: (4*reg_max + nc, A)."""
        flat = [self.tensors[s].reshape(self.tensors[s].shape[0], -1) for s in self.strides]
        return np.concatenate(flat, axis=1)


@dataclass(frozen=True)
class Grid:
    """Anchor-point centers (A, 2) and the stride of each anchor (A,)."""

    points: np.ndarray
    strides: np.ndarray

    def __len__(self) -> int:
        return self.points.shape[0]


def make_grid(input_w: int, input_h: int, strides=DEFAULT_STRIDES) -> Grid:
    """Anchor points at cell centers ((j+0.5)*s, (i+0.5)*s), row-major per level.

    Levels are laid out in ascending stride order, matching
    RawHeadOutput.concat.
    """
    points = []
    anchor_strides = []
    for s in sorted(strides):
        if input_w % s or input_h % s:
            raise NotDivisibleError(f"input {input_w}x{input_h} not divisible by stride {s}")
        gw, gh = input_w // s, input_h // s
        xs = (np.arange(gw, dtype=np.float32) + 0.5) * s
        ys = (np.arange(gh, dtype=np.float32) + 0.5) * s
        gx, gy = np.meshgrid(xs, ys)
        points.append(np.stack([gx.ravel(), gy.ravel()], axis=1))
        anchor_strides.append(np.full(gw * gh, s, dtype=np.float32))
    return Grid(np.concatenate(points), np.concatenate(anchor_strides))


def dfl_expectation(logits: np.ndarray) -> np.ndarray | float:
    """Expected distance of a discrete distribution over reg_max bins.

    Softmax (max-subtracted for stability) over the last axis, then
    sum(k * p_k). Scalar in, scalar out; arrays keep leading axes.
    """
    arr = np.asarray(logits, dtype=np.float64)
    if arr.shape[-1] < 2:
        raise ValueError("dfl_expectation needs at least 2 bins")
    shifted = arr - arr.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=-1, keepdims=True)
    bins = np.arange(arr.shape[-1], dtype=np.float64)
    out = (probs * bins).sum(axis=-1)
    return float(out) if np.isscalar(logits) or np.ndim(logits) == 1 else out


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _logit(p: float) -> float:
    return float(np.log(p / (1.0 - p)))


def decode_raw(raw: RawHeadOutput, grid: Grid, conf_threshold: float = 0.25) -> list[Detection]:
    """Decode head logits into thresholded pre-NMS detections.

    Box edges are the DFL expectations of the four distance groups scaled
    by the anchor stride; class scores are per-class sigmoids. A
    (box, class, score) triple is emitted for every class whose score
    exceeds the threshold.
    """
    flat = raw.concat()
    n_reg = 4 * raw.reg_max
    if flat.shape[0] != n_reg + raw.nc:
        raise ShapeMismatchError(
            f"got {flat.shape[0]} channels, expected {n_reg + raw.nc} (reg_max={raw.reg_max}, nc={raw.nc})"
        )
    if flat.shape[1] != len(grid):
        raise ShapeMismatchError(f"{flat.shape[1]} anchors in tensor vs {len(grid)} in grid")

    cls_logits = flat[n_reg:]
    # sigmoid is monotone: thresholding logits avoids exp over every cell
    candidates = np.nonzero((cls_logits > _logit(conf_threshold)).any(axis=0))[0]
    if candidates.size == 0:
        return []

    reg = flat[:n_reg, candidates].T.reshape(-1, 4, raw.reg_max)
    dist = dfl_expectation(reg)  # (n, 4) in bin units: l, t, r, b
    points = grid.points[candidates]
    strides = grid.strides[candidates]
    x1 = points[:, 0] - dist[:, 0] * strides
    y1 = points[:, 1] - dist[:, 1] * strides
    x2 = points[:, 0] + dist[:, 2] * strides
    y2 = points[:, 1] + dist[:, 3] * strides

    scores = sigmoid(cls_logits[:, candidates])
    out: list[Detection] = []
    cls_idx, anchor_pos = np.nonzero(scores > conf_threshold)
    for c, a in zip(cls_idx, anchor_pos):
        out.append(
            Detection(
                PixelBox(float(x1[a]), float(y1[a]), float(x2[a]), float(y2[a])),
                int(c),
                float(scores[c, a]),
            )
        )
    return out


def decode_pretransformed(tensor: np.ndarray, conf_threshold: float = 0.25) -> list[Detection]:
    """Threshold an already-decoded (4 + nc, A) tensor.

    Rows 0..3 are cx, cy, w, h in letterboxed pixels; remaining rows are
    per-class probabilities in [0, 1] (no sigmoid applied here).
    """
    tensor = np.asarray(tensor)
    if tensor.ndim != 2 or tensor.shape[0] < 5:
        raise ShapeMismatchError(f"expected (4 + nc, A) tensor, got shape {tensor.shape}")
    boxes = tensor[:4]
    scores = tensor[4:]
    out: list[Detection] = []
    cls_idx, anchor_pos = np.nonzero(scores > conf_threshold)
    for c, a in zip(cls_idx, anchor_pos):
        cx, cy, w, h = (float(v) for v in boxes[:, a])
        out.append(
            Detection(
                PixelBox(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2),
                int(c),
                float(scores[c, a]),
            )
        )
    return out


def _sort_key(d: Detection):
    # deterministic total order: score desc, then class, then geometry
    return (-d.score, d.class_id, d.box.x1, d.box.y1, d.box.x2, d.box.y2)


def nms(
    dets: list[Detection],
    iou_threshold: float = 0.45,
    class_aware: bool = True,
    max_detections: int = 300,
) -> list[Detection]:
    """Greedy non-maximum suppression with a deterministic tie-break.

    A detection is kept iff its IoU with every already-kept detection of
    the same class (any class when not class_aware) stays below the
    threshold; output is truncated to max_detections.
    """
    if not dets:
        return []
    ordered = sorted(dets, key=_sort_key)
    kept: list[Detection] = []
    for d in ordered:
        suppressed = False
        for k in kept:
            if class_aware and k.class_id != d.class_id:
                continue
            if iou(k.box, d.box) >= iou_threshold:
                suppressed = True
                break
        if not suppressed:
            kept.append(d)
            if len(kept) >= max_detections:
                break
    return kept
