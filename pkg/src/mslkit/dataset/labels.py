"""Read and write YOLO label files: one "class cx cy w h" line per box."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from mslkit.errors import ClassOutOfRangeError, CoordOutOfRangeError, MalformedLineError
from mslkit.geometry import NormBox

LabelEntry = tuple[int, NormBox]

IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png", ".bmp", ".webp", ".tif", ".tiff"}


@dataclass
class LabeledImage:
    """One image path with its size and ground-truth normalized boxes."""

    image_path: Path
    width: int
    height: int
    boxes: list[LabelEntry] = field(default_factory=list)


def parse_label_file(text: str, nc: int) -> list[LabelEntry]:
    """Parse YOLO label text into (class_id, NormBox) entries.

    Empty files are valid negative samples and yield an empty list.

    Raises:
        MalformedLineError: token count != 5 or non-numeric tokens.
        ClassOutOfRangeError: class id outside [0, nc).
        CoordOutOfRangeError: any coordinate outside [0, 1].
    """
    entries: list[LabelEntry] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        tokens = line.split()
        if len(tokens) != 5:
            raise MalformedLineError(f"expected 5 tokens, got {len(tokens)}", lineno)
        try:
            class_id = int(tokens[0])
        except ValueError:
            raise MalformedLineError(f"class id {tokens[0]!r} is not an integer", lineno) from None
        try:
            cx, cy, w, h = (float(t) for t in tokens[1:])
        except ValueError:
            raise MalformedLineError(f"non-numeric coordinate in {tokens[1:]}", lineno) from None
        if not 0 <= class_id < nc:
            raise ClassOutOfRangeError(f"class {class_id} outside [0, {nc})", lineno)
        for value in (cx, cy, w, h):
            if not 0.0 <= value <= 1.0:
                raise CoordOutOfRangeError(f"coordinate {value} outside [0, 1]", lineno)
        entries.append((class_id, NormBox(cx, cy, w, h)))
    return entries


def write_label_file(entries: list[LabelEntry]) -> str:
    """Format entries as label text, 6-decimal fixed point, one per line."""
    lines = []
    for class_id, box in entries:
        lines.append(f"{class_id} {box.cx:.6f} {box.cy:.6f} {box.w:.6f} {box.h:.6f}\n")
    return "".join(lines)


def label_path_for_image(image_path: Path) -> Path:
    """Label file for an image: labels/<stem>.txt beside the images dir.

    Follows the usual YOLO layout (last "images" path component replaced
    by "labels"); falls back to a sibling .txt next to the image.
    """
    image_path = Path(image_path)
    parts = list(image_path.parts)
    for i in range(len(parts) - 1, -1, -1):
        if parts[i] == "images":
            parts[i] = "labels"
            return Path(*parts).with_suffix(".txt")
    return image_path.with_suffix(".txt")


def is_image_file(path: Path) -> bool:
    return Path(path).suffix.lower() in IMAGE_SUFFIXES
