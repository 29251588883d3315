"""Deterministic image augmentations: salt-and-pepper noise, rotation, resize.

Images are numpy uint8 arrays, (H, W) or (H, W, C). Boxes ride along as
(class_id, NormBox) entries so every augmentation keeps labels consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import cv2
import numpy as np

from mslkit.dataset.labels import LabelEntry
from mslkit.geometry import NormBox, PixelBox, norm_to_pixel, pixel_to_norm

# hull boxes whose in-frame area drops below this fraction of the original
# box area are degenerate slivers and get dropped
MIN_KEPT_AREA_FRACTION = 0.2


@dataclass(frozen=True)
class AugmentSpec:
    """Augmentation recipe: noise fraction, rotation bound, target size, seed."""

    noise_fraction: float = 0.05
    rotation_degrees: float = 10.0
    target_w: int = 432
    target_h: int = 256
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.noise_fraction <= 1.0:
            raise ValueError(f"noise_fraction {self.noise_fraction} outside [0, 1]")
        if abs(self.rotation_degrees) > 45.0:
            raise ValueError(f"rotation magnitude {self.rotation_degrees} exceeds 45 degrees")


def augment_noise(image: np.ndarray, fraction: float, seed: int) -> np.ndarray:
    """Salt-and-pepper noise on exactly round(fraction * W * H) pixels.

    Pixels are chosen without replacement by a generator seeded with
    `seed` and set to pure black or white with equal probability. A pixel
    already at the drawn polarity flips to the opposite one, so the count
    of changed pixels is exact for any input image.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction {fraction} outside [0, 1]")
    out = image.copy()
    h, w = image.shape[:2]
    n = int(round(fraction * w * h))
    if n == 0:
        return out

    rng = np.random.default_rng(seed)
    idx = rng.choice(h * w, size=n, replace=False)
    polarity = rng.integers(0, 2, size=n).astype(np.uint8) * 255

    flat = out.reshape(h * w, -1)
    already = (flat[idx] == polarity[:, None]).all(axis=1)
    polarity[already] = 255 - polarity[already]
    flat[idx] = polarity[:, None]
    return out


def augment_rotate(
    image: np.ndarray, boxes: list[LabelEntry], angle_degrees: float
) -> tuple[np.ndarray, list[LabelEntry]]:
    """Rotate image about its center; re-box with axis-aligned corner hulls.

    The canvas size is unchanged, exposed corners fill with black, and each
    box becomes the hull of its four rotated corners clipped to the frame.
    Boxes keeping less than 20% of their original area are dropped.
    """
    if angle_degrees == 0.0:
        return image.copy(), list(boxes)

    h, w = image.shape[:2]
    # index-space center (w-1)/2 matches continuous-coordinate rotation
    # about (w/2, h/2) used for the box corners below
    matrix = cv2.getRotationMatrix2D(((w - 1) / 2.0, (h - 1) / 2.0), angle_degrees, 1.0)
    rotated = cv2.warpAffine(
        image, matrix, (w, h), flags=cv2.INTER_LINEAR, borderMode=cv2.BORDER_CONSTANT, borderValue=0
    )

    theta = math.radians(angle_degrees)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    out_boxes: list[LabelEntry] = []
    for class_id, nb in boxes:
        pb = norm_to_pixel(nb, w, h)
        corners = np.array(
            [[pb.x1, pb.y1], [pb.x2, pb.y1], [pb.x2, pb.y2], [pb.x1, pb.y2]], dtype=np.float64
        )
        dx = corners[:, 0] - w / 2.0
        dy = corners[:, 1] - h / 2.0
        rx = cos_t * dx + sin_t * dy + w / 2.0
        ry = -sin_t * dx + cos_t * dy + h / 2.0

        hull = PixelBox(rx.min(), ry.min(), rx.max(), ry.max())
        clipped = hull.clamp(w, h)
        if clipped.area < MIN_KEPT_AREA_FRACTION * pb.area:
            continue
        out_boxes.append((class_id, pixel_to_norm(clipped, w, h)))
    return rotated, out_boxes


def resize_with_boxes(
    image: np.ndarray, boxes: list[LabelEntry], target_w: int, target_h: int
) -> tuple[np.ndarray, list[LabelEntry]]:
    """Direct (non-uniform) resize; normalized boxes are scale-invariant."""
    if target_w <= 0 or target_h <= 0:
        raise ValueError(f"target size {target_w}x{target_h} must be positive")
    h, w = image.shape[:2]
    if (w, h) == (target_w, target_h):
        return image.copy(), list(boxes)
    resized = cv2.resize(image, (target_w, target_h), interpolation=cv2.INTER_LINEAR)
    return resized, list(boxes)
