"""Frame sources: directories, single images, and a live-capture adapter."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import cv2
import numpy as np

from mslkit.dataset.corpus import ingest_frames


@dataclass
class Frame:
    index: int
    image: np.ndarray  # RGB uint8
    timestamp: float


def _load_rgb(path: Path) -> np.ndarray:
    bgr = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if bgr is None:
        raise FileNotFoundError(f"cannot read image {path}")
    return cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB)


class DirectorySource:
    """Frames from an image directory in lexicographic order."""

    def __init__(self, directory: str | Path, stride: int = 1, fps: float = 60.0):
        self.paths = ingest_frames(directory, stride=stride)
        self.fps = fps

    def __iter__(self) -> Iterator[Frame]:
        for i, path in enumerate(self.paths):
            yield Frame(index=i, image=_load_rgb(path), timestamp=i / self.fps)

    def __len__(self) -> int:
        return len(self.paths)


class SingleImageSource:
    def __init__(self, path: str | Path):
        self.path = Path(path)

    def __iter__(self) -> Iterator[Frame]:
        yield Frame(index=0, image=_load_rgb(self.path), timestamp=0.0)

    def __len__(self) -> int:
        return 1


class VideoCaptureSource:
    """Live/video adapter over cv2.VideoCapture; not used in CI."""

    def __init__(self, target, max_frames: int | None = None):
        self.target = target
        self.max_frames = max_frames

    def __iter__(self) -> Iterator[Frame]:
        capture = cv2.VideoCapture(self.target)
        try:
            index = 0
            while self.max_frames is None or index < self.max_frames:
                ok, bgr = capture.read()
                if not ok:
                    break
                timestamp = capture.get(cv2.CAP_PROP_POS_MSEC) / 1000.0
                yield Frame(index=index, image=cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB), timestamp=timestamp)
                index += 1
        finally:
            capture.release()
