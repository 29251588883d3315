"""YOLO-format dataset tooling: labels, manifests, augmentation, splits."""

from mslkit.dataset.augment import AugmentSpec, augment_noise, augment_rotate, resize_with_boxes
from mslkit.dataset.corpus import dataset_stats, ingest_frames, split_dataset
from mslkit.dataset.labels import (
    LabeledImage,
    label_path_for_image,
    parse_label_file,
    write_label_file,
)
from mslkit.dataset.manifest import (
    DEFAULT_CLASS_NAMES,
    DatasetManifest,
    list_split_images,
    load_manifest,
    save_manifest,
)

__all__ = [
    "AugmentSpec",
    "augment_noise",
    "augment_rotate",
    "resize_with_boxes",
    "dataset_stats",
    "ingest_frames",
    "split_dataset",
    "LabeledImage",
    "label_path_for_image",
    "parse_label_file",
    "write_label_file",
    "DEFAULT_CLASS_NAMES",
    "DatasetManifest",
    "list_split_images",
    "load_manifest",
    "save_manifest",
]
