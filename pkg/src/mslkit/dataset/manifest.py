"""Dataset manifest: the YOLO-style YAML file naming splits and classes."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from mslkit.dataset.labels import is_image_file
from mslkit.errors import CountMismatchError, ManifestError, MissingKeyError, UnreadableError

# Placeholder transliterations for the 20 static signs; real class names are
# dataset-specific and normally supplied by the user.
DEFAULT_CLASS_NAMES = [
    "a", "aa", "i", "ii", "u", "uu", "e", "ee", "ai", "o",
    "oo", "au", "ka", "ga", "nga", "cha", "ja", "ta", "na", "va",
]

REQUIRED_KEYS = ("train", "val", "names")


@dataclass
class DatasetManifest:
    """Parsed manifest with split references resolved to absolute paths."""

    root: Path
    split_paths: dict[str, Path]
    nc: int
    names: list[str]
    origin: Path

    @property
    def splits(self) -> list[str]:
        return list(self.split_paths)


def load_manifest(path: str | Path) -> DatasetManifest:
    """Load and validate a dataset manifest.

    Raises:
        UnreadableError: file missing, unparseable, or not a mapping.
        MissingKeyError: any of train/val/names absent.
        CountMismatchError: declared nc != len(names).
    """
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as e:
        raise UnreadableError(f"cannot read manifest {path}: {e}") from e
    if not isinstance(raw, dict):
        raise UnreadableError(f"manifest {path} is not a key/value mapping")

    for key in REQUIRED_KEYS:
        if key not in raw:
            raise MissingKeyError(key)

    names = _parse_names(raw["names"])
    nc = int(raw.get("nc", len(names)))
    if nc != len(names):
        raise CountMismatchError(nc, len(names))
    if len(set(names)) != len(names) or any(not n for n in names):
        raise ManifestError("class names must be unique and non-empty")

    root = Path(raw.get("path", "."))
    if not root.is_absolute():
        root = (path.parent / root).resolve()

    split_paths: dict[str, Path] = {}
    for split in ("train", "val", "test"):
        if split in raw and raw[split] is not None:
            ref = Path(raw[split])
            split_paths[split] = ref if ref.is_absolute() else (root / ref).resolve()

    return DatasetManifest(root=root, split_paths=split_paths, nc=nc, names=names, origin=path)


def _parse_names(value) -> list[str]:
    # accept both the list form and the {index: name} mapping form
    if isinstance(value, dict):
        return [str(value[k]) for k in sorted(value)]
    if isinstance(value, list):
        return [str(v) for v in value]
    raise UnreadableError(f"names must be a list or index mapping, got {type(value).__name__}")


def save_manifest(
    path: str | Path,
    root: str | Path,
    split_paths: dict[str, str],
    names: list[str],
) -> None:
    """Write a manifest YAML; split paths are stored relative to root."""
    doc = {"path": str(root)}
    for split in ("train", "val", "test"):
        if split in split_paths:
            doc[split] = split_paths[split]
    doc["nc"] = len(names)
    doc["names"] = list(names)
    Path(path).write_text(yaml.safe_dump(doc, sort_keys=False, default_flow_style=False))


def list_split_images(manifest: DatasetManifest, split: str) -> list[Path]:
    """Images of one split, sorted; the split may be a directory or a list file."""
    if split not in manifest.split_paths:
        raise ManifestError(f"manifest has no {split!r} split")
    ref = manifest.split_paths[split]
    if ref.is_dir():
        return sorted(p for p in ref.iterdir() if p.is_file() and is_image_file(p))
    if ref.is_file():
        images = []
        for line in ref.read_text().splitlines():
            line = line.strip()
            if not line:
                continue
            p = Path(line)
            images.append(p if p.is_absolute() else (manifest.root / p).resolve())
        return images
    raise ManifestError(f"split reference {ref} is neither a directory nor a list file")
