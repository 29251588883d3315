"""Assemble YOLO dataset trees: resize, augment variants, split, write."""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

from mslkit.dataset.augment import AugmentSpec, augment_noise, augment_rotate, resize_with_boxes
from mslkit.dataset.corpus import split_dataset
from mslkit.dataset.labels import (
    LabelEntry,
    is_image_file,
    label_path_for_image,
    parse_label_file,
    write_label_file,
)
from mslkit.dataset.manifest import save_manifest
from mslkit.errors import EmptyDirectoryError, LabelError


@dataclass
class PoolItem:
    stem: str
    image_path: Path
    entries: list[LabelEntry]


def load_pool(images_dir: str | Path, labels_dir: str | Path | None, nc: int) -> list[PoolItem]:
    """Pair every image in a flat directory with its label entries.

    Labels come from labels_dir/<stem>.txt when given, otherwise from the
    usual images->labels convention; a missing file is a negative sample.
    """
    images_dir = Path(images_dir)
    images = sorted(p for p in images_dir.iterdir() if p.is_file() and is_image_file(p))
    if not images:
        raise EmptyDirectoryError(f"no image files in {images_dir}")
    pool = []
    for image_path in images:
        if labels_dir is not None:
            label_path = Path(labels_dir) / f"{image_path.stem}.txt"
        else:
            label_path = label_path_for_image(image_path)
        entries: list[LabelEntry] = []
        if label_path.is_file():
            try:
                entries = parse_label_file(label_path.read_text(), nc)
            except LabelError as e:
                raise e.at_path(label_path) from None
        pool.append(PoolItem(stem=image_path.stem, image_path=image_path, entries=entries))
    return pool


def variant_seed(seed: int, stem: str) -> int:
    """Per-image seed, stable under pool ordering changes."""
    return (seed ^ zlib.crc32(stem.encode("utf-8"))) & 0x7FFFFFFF


def augment_variants(
    image: np.ndarray, entries: list[LabelEntry], spec: AugmentSpec, stem: str
) -> list[tuple[str, np.ndarray, list[LabelEntry]]]:
    """Original plus the recipe's variants: noised copy and +/- rotations."""
    variants = [("orig", image, entries)]
    if spec.noise_fraction > 0:
        variants.append(
            ("noise", augment_noise(image, spec.noise_fraction, variant_seed(spec.seed, stem)), entries)
        )
    if spec.rotation_degrees != 0:
        rot_img, rot_boxes = augment_rotate(image, entries, spec.rotation_degrees)
        variants.append(("rotp", rot_img, rot_boxes))
        rot_img, rot_boxes = augment_rotate(image, entries, -spec.rotation_degrees)
        variants.append(("rotn", rot_img, rot_boxes))
    return variants


def write_example(
    out_root: Path, split: str, stem: str, image: np.ndarray, entries: list[LabelEntry]
) -> None:
    img_dir = out_root / "images" / split
    lbl_dir = out_root / "labels" / split
    img_dir.mkdir(parents=True, exist_ok=True)
    lbl_dir.mkdir(parents=True, exist_ok=True)
    bgr = cv2.cvtColor(image, cv2.COLOR_RGB2BGR) if image.ndim == 3 else image
    cv2.imwrite(str(img_dir / f"{stem}.png"), bgr)
    (lbl_dir / f"{stem}.txt").write_text(write_label_file(entries))


def _read_rgb(path: Path) -> np.ndarray:
    bgr = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if bgr is None:
        raise EmptyDirectoryError(f"cannot decode image {path}")
    return cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB)


def build_dataset(
    images_dir: str | Path,
    labels_dir: str | Path | None,
    out_dir: str | Path,
    names: list[str],
    spec: AugmentSpec,
    ratios: tuple[float, float, float] = (0.8, 0.2, 0.0),
    stride: int = 1,
) -> dict:
    """Full build: ingest, resize, augment, stratified split, write tree.

    Augmented variants of one source image always land in the source's
    split so augmentation cannot leak across train/val boundaries.
    """
    out_dir = Path(out_dir)
    pool = load_pool(images_dir, labels_dir, nc=len(names))
    pool = pool[::stride]

    # stratify on the first box's class; negatives form their own stratum
    strata = [item.entries[0][0] if item.entries else -1 for item in pool]
    train, val, test = split_dataset(pool, ratios, seed=spec.seed, labels=strata)

    counts = {"train": 0, "val": 0, "test": 0}
    for split, items in (("train", train), ("val", val), ("test", test)):
        for item in items:
            image = _read_rgb(item.image_path)
            image, entries = resize_with_boxes(image, item.entries, spec.target_w, spec.target_h)
            for suffix, var_image, var_entries in augment_variants(image, entries, spec, item.stem):
                write_example(out_dir, split, f"{item.stem}__{suffix}", var_image, var_entries)
                counts[split] += 1

    split_paths = {"train": "images/train", "val": "images/val"}
    if counts["test"]:
        split_paths["test"] = "images/test"
    for split in split_paths.values():  # ensure empty split dirs exist
        (out_dir / split).mkdir(parents=True, exist_ok=True)
        (out_dir / split.replace("images", "labels")).mkdir(parents=True, exist_ok=True)
    # "." keeps the manifest portable: path resolves against its own location
    save_manifest(out_dir / "data.yaml", root=".", split_paths=split_paths, names=names)
    return {"out": str(out_dir), "examples": counts, "manifest": str(out_dir / "data.yaml")}


def augment_pool(
    images_dir: str | Path,
    labels_dir: str | Path | None,
    out_dir: str | Path,
    spec: AugmentSpec,
    nc: int,
) -> dict:
    """Write original + augmented variants of a flat pool (no split)."""
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "labels").mkdir(parents=True, exist_ok=True)
    pool = load_pool(images_dir, labels_dir, nc=nc)
    written = 0
    for item in pool:
        image = _read_rgb(item.image_path)
        for suffix, var_image, var_entries in augment_variants(image, item.entries, spec, item.stem):
            bgr = cv2.cvtColor(var_image, cv2.COLOR_RGB2BGR)
            cv2.imwrite(str(out_dir / "images" / f"{item.stem}__{suffix}.png"), bgr)
            (out_dir / "labels" / f"{item.stem}__{suffix}.txt").write_text(
                write_label_file(var_entries)
            )
            written += 1
    return {"out": str(out_dir), "examples": written}


def split_pool(
    images_dir: str | Path,
    labels_dir: str | Path | None,
    out_dir: str | Path,
    names: list[str],
    ratios: tuple[float, float, float],
    seed: int,
) -> dict:
    """Split an existing pool into a manifest-backed train/val/test tree."""
    out_dir = Path(out_dir)
    pool = load_pool(images_dir, labels_dir, nc=len(names))
    strata = [item.entries[0][0] if item.entries else -1 for item in pool]
    train, val, test = split_dataset(pool, ratios, seed=seed, labels=strata)

    counts = {}
    for split, items in (("train", train), ("val", val), ("test", test)):
        counts[split] = len(items)
        for item in items:
            image = _read_rgb(item.image_path)
            write_example(out_dir, split, item.stem, image, item.entries)

    split_paths = {"train": "images/train", "val": "images/val"}
    if counts["test"]:
        split_paths["test"] = "images/test"
    for split in split_paths.values():
        (out_dir / split).mkdir(parents=True, exist_ok=True)
        (out_dir / split.replace("images", "labels")).mkdir(parents=True, exist_ok=True)
    save_manifest(out_dir / "data.yaml", root=".", split_paths=split_paths, names=names)
    return {"out": str(out_dir), "examples": counts, "manifest": str(out_dir / "data.yaml")}
