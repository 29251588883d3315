"""Burn detection boxes and labels into frames and write them out."""

from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np

from mslkit.decode import Detection

BOX_COLOR = (0, 200, 0)
TEXT_COLOR = (255, 255, 255)


def draw_detections(
    image: np.ndarray, detections: list[Detection], names: list[str] | None = None
) -> np.ndarray:
    """Copy of an RGB frame with boxes and "label score" captions drawn."""
    out = image.copy()
    for d in detections:
        p1 = (int(round(d.box.x1)), int(round(d.box.y1)))
        p2 = (int(round(d.box.x2)), int(round(d.box.y2)))
        cv2.rectangle(out, p1, p2, BOX_COLOR, 2)
        label = names[d.class_id] if names else str(d.class_id)
        text = f"{label} {d.score:.2f}"
        (tw, th), baseline = cv2.getTextSize(text, cv2.FONT_HERSHEY_SIMPLEX, 0.5, 1)
        ty = max(p1[1], th + baseline)
        cv2.rectangle(out, (p1[0], ty - th - baseline), (p1[0] + tw, ty), BOX_COLOR, -1)
        cv2.putText(out, text, (p1[0], ty - baseline // 2), cv2.FONT_HERSHEY_SIMPLEX, 0.5, TEXT_COLOR, 1)
    return out


class AnnotatedFrameWriter:
    """Writes annotated frames as numbered PNGs into a directory."""

    def __init__(self, directory: str | Path, names: list[str] | None = None):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.names = names

    def write(self, frame_index: int, image: np.ndarray, detections: list[Detection]) -> Path:
        annotated = draw_detections(image, detections, self.names)
        path = self.directory / f"frame_{frame_index:06d}.png"
        cv2.imwrite(str(path), cv2.cvtColor(annotated, cv2.COLOR_RGB2BGR))
        return path
