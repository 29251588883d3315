"""Box representations, coordinate transforms, and overlap metrics.

Boxes travel through the toolkit as continuous (sub-pixel) ``PixelBox``
values in xyxy form; ``NormBox`` (YOLO cx,cy,w,h fractions) only appears
at dataset I/O boundaries. All functions here are pure and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PixelBox:
    """Axis-aligned box in absolute pixel coordinates, x1 <= x2, y1 <= y2."""

    x1: float
    y1: float
    x2: float
    y2: float

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def cx(self) -> float:
        return (self.x1 + self.x2) / 2.0

    @property
    def cy(self) -> float:
        return (self.y1 + self.y2) / 2.0

    def clamp(self, w: float, h: float) -> "PixelBox":
        """Clip the box to the rectangle [0, w] x [0, h]."""
        return PixelBox(
            min(max(self.x1, 0.0), w),
            min(max(self.y1, 0.0), h),
            min(max(self.x2, 0.0), w),
            min(max(self.y2, 0.0), h),
        )


@dataclass(frozen=True)
class NormBox:
    """YOLO-normalized box: center and size as fractions of image dims."""

    cx: float
    cy: float
    w: float
    h: float

    def clamped(self) -> "NormBox":
        """Clip the box edges to [0, 1] and recompute center/size."""
        x1 = min(max(self.cx - self.w / 2.0, 0.0), 1.0)
        y1 = min(max(self.cy - self.h / 2.0, 0.0), 1.0)
        x2 = min(max(self.cx + self.w / 2.0, 0.0), 1.0)
        y2 = min(max(self.cy + self.h / 2.0, 0.0), 1.0)
        return NormBox((x1 + x2) / 2.0, (y1 + y2) / 2.0, x2 - x1, y2 - y1)


@dataclass(frozen=True)
class LetterboxMeta:
    """Geometry of an aspect-preserving resize with centered padding.

    scale is min(dst_w/src_w, dst_h/src_h); pad_x/pad_y are the centered
    pixel remainders on each side (floats, >= 0).
    """

    scale: float
    pad_x: float
    pad_y: float
    src_w: int
    src_h: int
    dst_w: int
    dst_h: int


def iou(a: PixelBox, b: PixelBox) -> float:
    """Intersection over union of two pixel boxes; 0 when disjoint.

    Degenerate (zero-area) boxes yield 0.
    """
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    if ix <= 0.0 or iy <= 0.0:
        return 0.0
    inter = ix * iy
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def ciou(a: PixelBox, b: PixelBox) -> float:
    """Complete IoU: IoU minus center-distance and aspect-ratio penalties.

    ciou = iou - rho^2/c^2 - alpha*v with rho the center distance, c the
    diagonal of the smallest enclosing box, v the squared arctan aspect
    difference, and alpha = v / ((1 - iou) + v). Identical boxes score
    exactly 1 (the alpha term is a removable singularity at iou = 1).
    """
    if a == b:
        return 1.0
    iou_val = iou(a, b)

    rho2 = (a.cx - b.cx) ** 2 + (a.cy - b.cy) ** 2
    cw = max(a.x2, b.x2) - min(a.x1, b.x1)
    ch = max(a.y2, b.y2) - min(a.y1, b.y1)
    c2 = cw * cw + ch * ch
    center_term = rho2 / c2 if c2 > 0.0 else 0.0

    # atan2 keeps the aspect term defined for zero-width/height boxes
    v = (4.0 / math.pi**2) * (math.atan2(a.width, a.height) - math.atan2(b.width, b.height)) ** 2
    denom = (1.0 - iou_val) + v
    alpha = v / denom if denom > 0.0 else 0.0

    return iou_val - center_term - alpha * v


def norm_to_pixel(b: NormBox, img_w: float, img_h: float) -> PixelBox:
    """Convert a normalized box to absolute pixel xyxy coordinates."""
    return PixelBox(
        (b.cx - b.w / 2.0) * img_w,
        (b.cy - b.h / 2.0) * img_h,
        (b.cx + b.w / 2.0) * img_w,
        (b.cy + b.h / 2.0) * img_h,
    )


def pixel_to_norm(box: PixelBox, img_w: float, img_h: float) -> NormBox:
    """Convert a pixel box to normalized form, clipped to the image."""
    clipped = box.clamp(img_w, img_h)
    return NormBox(
        (clipped.x1 + clipped.x2) / 2.0 / img_w,
        (clipped.y1 + clipped.y2) / 2.0 / img_h,
        clipped.width / img_w,
        clipped.height / img_h,
    )


def letterbox_params(src_w: int, src_h: int, dst_w: int, dst_h: int) -> LetterboxMeta:
    """Compute the uniform scale and centered pads mapping src into dst."""
    scale = min(dst_w / src_w, dst_h / src_h)
    pad_x = (dst_w - src_w * scale) / 2.0
    pad_y = (dst_h - src_h * scale) / 2.0
    return LetterboxMeta(scale, pad_x, pad_y, src_w, src_h, dst_w, dst_h)


def map_box(b: PixelBox, m: LetterboxMeta) -> PixelBox:
    """Map a source-space box into the letterboxed space."""
    return PixelBox(
        b.x1 * m.scale + m.pad_x,
        b.y1 * m.scale + m.pad_y,
        b.x2 * m.scale + m.pad_x,
        b.y2 * m.scale + m.pad_y,
    )


def unmap_box(b: PixelBox, m: LetterboxMeta) -> PixelBox:
    """Map a letterbox-space box back to source pixels, clipped to source."""
    return PixelBox(
        (b.x1 - m.pad_x) / m.scale,
        (b.y1 - m.pad_y) / m.scale,
        (b.x2 - m.pad_x) / m.scale,
        (b.y2 - m.pad_y) / m.scale,
    ).clamp(m.src_w, m.src_h)
