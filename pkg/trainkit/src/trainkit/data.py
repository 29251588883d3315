"""Dataset loading over the YOLO file layout (manifest + label txt)."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np
import yaml

IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png", ".bmp", ".webp"}


@dataclass
class Manifest:
    root: Path
    splits: dict[str, Path]
    nc: int
    names: list[str]


@dataclass
class Sample:
    image_path: Path
    # boxes as (class_id, cx, cy, w, h) normalized to the source image
    boxes: np.ndarray  # (n, 5) float32


def load_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    raw = yaml.safe_load(path.read_text())
    if not isinstance(raw, dict):
        raise ValueError(f"{path} is not a mapping")
    for key in ("train", "val", "names"):
        if key not in raw:
            raise ValueError(f"{path} missing key {key!r}")
    names = raw["names"]
    if isinstance(names, dict):
        names = [str(names[k]) for k in sorted(names)]
    names = [str(n) for n in names]
    nc = int(raw.get("nc", len(names)))
    if nc != len(names):
        raise ValueError(f"nc={nc} but {len(names)} names")
    root = Path(raw.get("path", "."))
    if not root.is_absolute():
        root = (path.parent / root).resolve()
    splits = {}
    for split in ("train", "val", "test"):
        if split in raw and raw[split] is not None:
            ref = Path(raw[split])
            splits[split] = ref if ref.is_absolute() else (root / ref).resolve()
    return Manifest(root=root, splits=splits, nc=nc, names=names)


def label_path_for(image_path: Path) -> Path:
    parts = list(image_path.parts)
    for i in range(len(parts) - 1, -1, -1):
        if parts[i] == "images":
            parts[i] = "labels"
            return Path(*parts).with_suffix(".txt")
    return image_path.with_suffix(".txt")


def load_split(manifest: Manifest, split: str, nc: int) -> list[Sample]:
    directory = manifest.splits[split]
    images = sorted(p for p in directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    samples = []
    for image_path in images:
        boxes = []
        label_path = label_path_for(image_path)
        if label_path.is_file():
            for line in label_path.read_text().splitlines():
                if not line.strip():
                    continue
                tokens = line.split()
                class_id = int(tokens[0])
                if not 0 <= class_id < nc:
                    raise ValueError(f"{label_path}: class {class_id} outside [0, {nc})")
                boxes.append([class_id] + [float(t) for t in tokens[1:5]])
        samples.append(
            Sample(image_path, np.array(boxes, dtype=np.float32).reshape(-1, 5))
        )
    return samples


def letterbox(image: np.ndarray, size: int) -> tuple[np.ndarray, float, float, float]:
    """Resize with preserved aspect onto a size x size gray canvas.

    Returns the canvas plus (scale, pad_x, pad_y) for mapping boxes; this
    mirrors the inference-side preprocessing so train and deploy geometry
    agree.
    """
    h, w = image.shape[:2]
    scale = min(size / w, size / h)
    new_w, new_h = min(int(round(w * scale)), size), min(int(round(h * scale)), size)
    pad_x = (size - w * scale) / 2.0
    pad_y = (size - h * scale) / 2.0
    resized = cv2.resize(image, (new_w, new_h), interpolation=cv2.INTER_LINEAR)
    canvas = np.full((size, size, 3), 114, dtype=np.uint8)
    left = min(max(int(round(pad_x)), 0), size - new_w)
    top = min(max(int(round(pad_y)), 0), size - new_h)
    canvas[top : top + new_h, left : left + new_w] = resized
    return canvas, scale, pad_x, pad_y


def load_example(sample: Sample, size: int) -> tuple[np.ndarray, np.ndarray]:
    """(3, size, size) float tensor in [0,1] plus (n, 5) pixel-space boxes
    [class, cx, cy, w, h] in the letterboxed canvas."""
    bgr = cv2.imread(str(sample.image_path), cv2.IMREAD_COLOR)
    if bgr is None:
        raise ValueError(f"cannot read {sample.image_path}")
    rgb = cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB)
    h, w = rgb.shape[:2]
    canvas, scale, pad_x, pad_y = letterbox(rgb, size)
    tensor = canvas.transpose(2, 0, 1).astype(np.float32) / 255.0

    boxes = sample.boxes.copy()
    out = np.zeros_like(boxes)
    if len(boxes):
        out[:, 0] = boxes[:, 0]
        out[:, 1] = boxes[:, 1] * w * scale + pad_x
        out[:, 2] = boxes[:, 2] * h * scale + pad_y
        out[:, 3] = boxes[:, 3] * w * scale
        out[:, 4] = boxes[:, 4] * h * scale
    return tensor, out
