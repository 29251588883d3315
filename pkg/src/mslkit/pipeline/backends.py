"""Model backends: tensor-replay files for hermetic runs, TorchScript for
exported models. Both present the same surface: declared output mode,
head geometry, expected input size, and an infer() call."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Protocol, runtime_checkable

import numpy as np

from mslkit.decode import RawHeadOutput
from mslkit.errors import ShapeMismatchError
from mslkit.pipeline.tensorfile import read_tensorfile

TENSORFILE_SUFFIXES = {".npt"}
TORCHSCRIPT_SUFFIXES = {".torchscript", ".pt", ".ts"}
METADATA_KEYS = ("mode", "reg_max", "nc", "strides", "input_w", "input_h", "names")


@runtime_checkable
class ModelBackend(Protocol):
    mode: str
    reg_max: int
    nc: int
    strides: tuple[int, ...]
    input_w: int
    input_h: int
    names: list[str] | None
    thread_safe: bool

    def infer(self, tensor: np.ndarray): ...


class TensorFileBackend:
    """Replays one recorded head output for every frame.

    The file has no notion of input geometry, so the expected input size
    is supplied by the caller and validated against the anchor count.
    """

    thread_safe = True

    def __init__(self, path: str | Path, input_w: int = 640, input_h: int = 640):
        header, array = read_tensorfile(path)
        self.mode = header["mode"]
        self.reg_max = int(header["reg_max"])
        self.nc = int(header["nc"])
        self.strides = tuple(int(s) for s in header["strides"])
        self.input_w = input_w
        self.input_h = input_h
        self.names = None

        if self.mode == "raw":
            channels = 4 * self.reg_max + self.nc
            if array.ndim != 2 or array.shape[0] != channels:
                raise ShapeMismatchError(
                    f"{path}: raw tensor shape {array.shape}, expected ({channels}, A)"
                )
            counts = [(input_w // s) * (input_h // s) for s in sorted(self.strides)]
            if array.shape[1] != sum(counts):
                raise ShapeMismatchError(
                    f"{path}: {array.shape[1]} anchors vs {sum(counts)} for "
                    f"{input_w}x{input_h} at strides {self.strides}"
                )
            tensors = {}
            offset = 0
            for s, count in zip(sorted(self.strides), counts):
                level = array[:, offset : offset + count]
                tensors[s] = level.reshape(channels, input_h // s, input_w // s)
                offset += count
            self._raw = RawHeadOutput(tensors=tensors, reg_max=self.reg_max, nc=self.nc)
            self._pre = None
        else:
            if array.ndim != 2 or array.shape[0] != 4 + self.nc:
                raise ShapeMismatchError(
                    f"{path}: pretransformed tensor shape {array.shape}, expected ({4 + self.nc}, A)"
                )
            self._raw = None
            self._pre = array

    def infer(self, tensor: np.ndarray):
        expect = (3, self.input_h, self.input_w)
        if tensor.shape != expect:
            raise ShapeMismatchError(f"input shape {tensor.shape}, backend expects {expect}")
        return self._raw if self.mode == "raw" else self._pre


class TorchscriptBackend:
    """Runs an exported TorchScript detector described by a metadata JSON."""

    thread_safe = False

    def __init__(self, model_path: str | Path, metadata: dict):
        import torch  # deferred: core toolkit stays usable without torch

        for key in METADATA_KEYS:
            if key not in metadata:
                raise ShapeMismatchError(f"model metadata missing {key!r}")
        self.mode = metadata["mode"]
        self.reg_max = int(metadata["reg_max"])
        self.nc = int(metadata["nc"])
        self.strides = tuple(int(s) for s in metadata["strides"])
        self.input_w = int(metadata["input_w"])
        self.input_h = int(metadata["input_h"])
        self.names = list(metadata["names"]) if metadata["names"] else None
        self._torch = torch
        self._module = torch.jit.load(str(model_path), map_location="cpu")
        self._module.eval()

    def infer(self, tensor: np.ndarray):
        expect = (3, self.input_h, self.input_w)
        if tensor.shape != expect:
            raise ShapeMismatchError(f"input shape {tensor.shape}, backend expects {expect}")
        with self._torch.no_grad():
            out = self._module(self._torch.from_numpy(np.ascontiguousarray(tensor))[None])
        if self.mode == "pretransformed":
            if isinstance(out, (list, tuple)):
                out = out[0]
            array = out.squeeze(0).numpy()
            if array.shape[0] != 4 + self.nc:
                raise ShapeMismatchError(
                    f"model output shape {array.shape}, expected ({4 + self.nc}, A)"
                )
            return array
        if not isinstance(out, (list, tuple)) or len(out) != len(self.strides):
            raise ShapeMismatchError("raw-mode model must return one tensor per stride")
        tensors = {
            s: level.squeeze(0).numpy() for s, level in zip(sorted(self.strides), out)
        }
        raw = RawHeadOutput(tensors=tensors, reg_max=self.reg_max, nc=self.nc)
        raw.validate(self.input_w, self.input_h)
        return raw


def load_backend(model: str | Path, input_w: int = 640, input_h: int = 640):
    """Pick a backend from a model path.

    .npt tensor files replay; a metadata .json or a TorchScript file (with
    metadata.json beside it) loads the exported-model backend.
    """
    model = Path(model)
    suffix = model.suffix.lower()
    if suffix in TENSORFILE_SUFFIXES:
        return TensorFileBackend(model, input_w=input_w, input_h=input_h)
    if suffix == ".json":
        metadata = json.loads(model.read_text())
        model_file = _find_model_file(model.parent)
        return TorchscriptBackend(model_file, metadata)
    if suffix in TORCHSCRIPT_SUFFIXES:
        meta_path = model.parent / "metadata.json"
        if not meta_path.is_file():
            raise ShapeMismatchError(f"no metadata.json beside {model}")
        return TorchscriptBackend(model, json.loads(meta_path.read_text()))
    raise ValueError(f"cannot infer backend type from {model}")


def _find_model_file(directory: Path) -> Path:
    for suffix in sorted(TORCHSCRIPT_SUFFIXES):
        candidates = sorted(directory.glob(f"*{suffix}"))
        if candidates:
            return candidates[0]
    raise FileNotFoundError(f"no TorchScript model file in {directory}")
