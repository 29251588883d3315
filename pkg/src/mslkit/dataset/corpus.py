"""Corpus-level operations: frame ingestion, splitting, and statistics."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Hashable, Sequence, TypeVar

import numpy as np

from mslkit.dataset.labels import is_image_file, label_path_for_image, parse_label_file
from mslkit.dataset.manifest import DatasetManifest, list_split_images
from mslkit.errors import EmptyDirectoryError, EmptyInputError, LabelError

T = TypeVar("T")

STATS_SCHEMA_VERSION = 1


def ingest_frames(directory: str | Path, stride: int = 1) -> list[Path]:
    """Every stride-th image from a frame directory, lexicographic order.

    Keeps frames 0, stride, 2*stride, ... so 300 frames at stride 3 yield
    100 and a stride beyond the count yields just the first frame.
    """
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    directory = Path(directory)
    frames = sorted(p for p in directory.iterdir() if p.is_file() and is_image_file(p))
    if not frames:
        raise EmptyDirectoryError(f"no image files in {directory}")
    return frames[::stride]


def split_dataset(
    items: Sequence[T],
    ratios: tuple[float, float, float],
    seed: int,
    labels: Sequence[Hashable] | None = None,
) -> tuple[list[T], list[T], list[T]]:
    """Seeded shuffle + contiguous partition into train/val/test.

    With `labels` (one hashable per item) the split is stratified: each
    class is partitioned separately so per-class counts land within one
    item of the requested ratios.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios {ratios} must sum to 1")
    if any(r < 0 for r in ratios):
        raise ValueError(f"ratios {ratios} must be non-negative")
    if not items:
        raise EmptyInputError("nothing to split")
    if labels is not None and len(labels) != len(items):
        raise ValueError("labels must parallel items")

    rng = np.random.default_rng(seed)
    if labels is None:
        groups = [list(range(len(items)))]
    else:
        by_label: dict[Hashable, list[int]] = defaultdict(list)
        for i, lab in enumerate(labels):
            by_label[lab].append(i)
        groups = [by_label[lab] for lab in sorted(by_label, key=repr)]

    out: tuple[list[T], list[T], list[T]] = ([], [], [])
    for group in groups:
        order = rng.permutation(len(group))
        shuffled = [group[i] for i in order]
        n = len(shuffled)
        c1 = round(n * ratios[0])
        c2 = round(n * (ratios[0] + ratios[1]))
        for bucket, chunk in zip(out, (shuffled[:c1], shuffled[c1:c2], shuffled[c2:])):
            bucket.extend(items[i] for i in chunk)
    return out


def dataset_stats(manifest: DatasetManifest) -> dict:
    """Per-class image/box counts and totals across all manifest splits.

    Label parse errors propagate with the offending file path attached.
    """
    per_class = {name: {"images": 0, "boxes": 0} for name in manifest.names}
    splits: dict[str, int] = {}
    total_images = 0
    total_boxes = 0
    unlabeled = 0

    for split in manifest.splits:
        images = list_split_images(manifest, split)
        splits[split] = len(images)
        for image_path in images:
            total_images += 1
            label_path = label_path_for_image(image_path)
            if not label_path.is_file():
                unlabeled += 1
                continue
            try:
                entries = parse_label_file(label_path.read_text(), manifest.nc)
            except LabelError as e:
                raise e.at_path(label_path) from None
            if not entries:
                unlabeled += 1
                continue
            total_boxes += len(entries)
            seen = set()
            for class_id, _ in entries:
                name = manifest.names[class_id]
                per_class[name]["boxes"] += 1
                if class_id not in seen:
                    per_class[name]["images"] += 1
                    seen.add(class_id)

    return {
        "schema_version": STATS_SCHEMA_VERSION,
        "nc": manifest.nc,
        "total_images": total_images,
        "total_boxes": total_boxes,
        "unlabeled_images": unlabeled,
        "splits": splits,
        "per_class": per_class,
    }
