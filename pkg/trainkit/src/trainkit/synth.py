"""Synthetic shapes datasets for smoke tests and toy training runs."""

from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np
import yaml

SHAPE_NAMES = ["disc", "box", "tri", "ring"]


def _draw_shape(image: np.ndarray, shape: int, cx: int, cy: int, half: int, color) -> None:
    if shape == 0:
        cv2.circle(image, (cx, cy), half, color, -1)
    elif shape == 1:
        cv2.rectangle(image, (cx - half, cy - half), (cx + half, cy + half), color, -1)
    elif shape == 2:
        points = np.array([[cx, cy - half], [cx - half, cy + half], [cx + half, cy + half]])
        cv2.fillPoly(image, [points], color)
    else:
        cv2.circle(image, (cx, cy), half, color, thickness=max(2, half // 3))


def generate_shapes_dataset(
    root: str | Path,
    n_images: int = 20,
    nc: int = 2,
    size: int = 160,
    seed: int = 0,
    val_fraction: float = 0.25,
) -> Path:
    """One bright shape per image on a dim noisy background; YOLO layout.

    Returns the manifest path. With no val images the manifest points val
    at the train directory so downstream validation always has data.
    """
    if not 1 <= nc <= len(SHAPE_NAMES):
        raise ValueError(f"nc must be in [1, {len(SHAPE_NAMES)}]")
    root = Path(root)
    rng = np.random.default_rng(seed)
    n_val = int(round(n_images * val_fraction))
    assignments = ["train"] * (n_images - n_val) + ["val"] * n_val

    for split in ("train", "val"):
        (root / "images" / split).mkdir(parents=True, exist_ok=True)
        (root / "labels" / split).mkdir(parents=True, exist_ok=True)

    colors = [(235, 80, 60), (70, 200, 235), (90, 235, 110), (235, 220, 80)]
    for i, split in enumerate(assignments):
        image = rng.integers(0, 60, size=(size, size, 3)).astype(np.uint8)
        shape = i % nc
        half = int(rng.integers(size // 8, size // 4))
        cx = int(rng.integers(half + 2, size - half - 2))
        cy = int(rng.integers(half + 2, size - half - 2))
        _draw_shape(image, shape, cx, cy, half, colors[shape])

        stem = f"shape_{i:04d}"
        cv2.imwrite(str(root / "images" / split / f"{stem}.png"), cv2.cvtColor(image, cv2.COLOR_RGB2BGR))
        label = f"{shape} {cx / size:.6f} {cy / size:.6f} {2 * half / size:.6f} {2 * half / size:.6f}\n"
        (root / "labels" / split / f"{stem}.txt").write_text(label)

    val_ref = "images/val" if n_val else "images/train"
    manifest = {
        "path": ".",  # resolved against the manifest's own directory
        "train": "images/train",
        "val": val_ref,
        "nc": nc,
        "names": SHAPE_NAMES[:nc],
    }
    manifest_path = root / "data.yaml"
    manifest_path.write_text(yaml.safe_dump(manifest, sort_keys=False))
    return manifest_path
