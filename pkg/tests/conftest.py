"""Shared builders for synthetic datasets and fixture trees."""

from pathlib import Path

import numpy as np

from mslkit.dataset.labels import write_label_file
from mslkit.dataset.manifest import save_manifest
from mslkit.geometry import NormBox


def class_names(n: int) -> list[str]:
    return [f"sign{i:02d}" for i in range(n)]


def make_split_tree(
    root: Path,
    split: str,
    entries_per_image: list[list[tuple[int, NormBox]]],
    touch_only: bool = True,
) -> list[Path]:
    """Write one split's images/ and labels/ trees; images may be stubs."""
    img_dir = root / "images" / split
    lbl_dir = root / "labels" / split
    img_dir.mkdir(parents=True, exist_ok=True)
    lbl_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, entries in enumerate(entries_per_image):
        img = img_dir / f"img_{i:05d}.jpg"
        if touch_only:
            img.touch()
        paths.append(img)
        (lbl_dir / f"img_{i:05d}.txt").write_text(write_label_file(entries))
    return paths


def make_dataset(
    root: Path,
    nc: int,
    images_per_class: int,
    val_fraction: float = 0.0,
) -> Path:
    """Synthetic dataset: one centered box per image, classes round-robin."""
    entries = []
    for c in range(nc):
        for _ in range(images_per_class):
            entries.append([(c, NormBox(0.5, 0.5, 0.4, 0.4))])
    n_val = int(round(len(entries) * val_fraction))
    split_at = len(entries) - n_val
    make_split_tree(root, "train", entries[:split_at])
    make_split_tree(root, "val", entries[split_at:] if n_val else [])
    manifest_path = root / "data.yaml"
    save_manifest(
        manifest_path,
        root=root,
        split_paths={"train": "images/train", "val": "images/val"},
        names=class_names(nc),
    )
    return manifest_path


def random_norm_box(rng: np.random.Generator, margin: float = 0.05) -> NormBox:
    cx = rng.uniform(margin + 0.05, 1 - margin - 0.05)
    cy = rng.uniform(margin + 0.05, 1 - margin - 0.05)
    w = rng.uniform(0.02, 2 * min(cx, 1 - cx) - 0.01)
    h = rng.uniform(0.02, 2 * min(cy, 1 - cy) - 0.01)
    return NormBox(cx, cy, w, h)
