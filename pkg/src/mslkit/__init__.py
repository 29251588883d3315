"""Toolkit for static sign-language gesture detection.

Covers YOLO-format dataset construction with the noise/rotation
augmentation recipe, anchor-free head decoding with class-aware NMS,
a frame-stream inference pipeline with caption debouncing, and
detection metrics (mAP, background-aware confusion matrix).
"""

from mslkit.geometry import LetterboxMeta, NormBox, PixelBox

__version__ = "0.1.0"

__all__ = ["PixelBox", "NormBox", "LetterboxMeta", "__version__"]
