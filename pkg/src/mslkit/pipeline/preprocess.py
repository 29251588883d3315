"""Inference-side letterbox preprocessing."""

from __future__ import annotations

import cv2
import numpy as np

from mslkit.errors import NotDivisibleError
from mslkit.geometry import LetterboxMeta, letterbox_params

PAD_VALUE = 114  # conventional gray fill for letterboxed detector inputs


def preprocess(image: np.ndarray, target_w: int, target_h: int) -> tuple[np.ndarray, LetterboxMeta]:
    """Letterbox an RGB uint8 image into a (3, target_h, target_w) tensor.

    Aspect-preserving resize with centered 114-gray padding; values scaled
    to [0, 1], channels first, RGB order. Targets must be multiples of 32.
    """
    if target_w % 32 or target_h % 32:
        raise NotDivisibleError(f"target {target_w}x{target_h} must be multiples of 32")
    if image.ndim == 2:
        image = np.stack([image] * 3, axis=-1)

    h, w = image.shape[:2]
    meta = letterbox_params(w, h, target_w, target_h)
    new_w = min(int(round(w * meta.scale)), target_w)
    new_h = min(int(round(h * meta.scale)), target_h)
    if (new_w, new_h) != (w, h):
        resized = cv2.resize(image, (new_w, new_h), interpolation=cv2.INTER_LINEAR)
    else:
        resized = image
    left = min(max(int(round(meta.pad_x)), 0), target_w - new_w)
    top = min(max(int(round(meta.pad_y)), 0), target_h - new_h)

    canvas = np.full((target_h, target_w, 3), PAD_VALUE, dtype=np.uint8)
    canvas[top : top + new_h, left : left + new_w] = resized
    tensor = canvas.transpose(2, 0, 1).astype(np.float32) / 255.0
    return tensor, meta
