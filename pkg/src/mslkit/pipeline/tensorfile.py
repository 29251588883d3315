"""Tensor replay files: one JSON header line, then a raw float32 payload.

The header is {"dims": [...], "dtype": "f32", "mode": "raw"|"pretransformed",
"reg_max": int, "nc": int, "strides": [...]} terminated by a newline; the
payload is the row-major little-endian float32 array, length = prod(dims).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from mslkit.errors import ShapeMismatchError

MODES = ("raw", "pretransformed")


def write_tensorfile(
    path: str | Path,
    array: np.ndarray,
    mode: str,
    reg_max: int,
    nc: int,
    strides,
) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    array = np.ascontiguousarray(array, dtype="<f4")
    header = {
        "dims": list(array.shape),
        "dtype": "f32",
        "mode": mode,
        "reg_max": int(reg_max),
        "nc": int(nc),
        "strides": [int(s) for s in strides],
    }
    with open(path, "wb") as f:
        f.write(json.dumps(header).encode("utf-8") + b"\n")
        f.write(array.tobytes())


def read_tensorfile(path: str | Path) -> tuple[dict, np.ndarray]:
    with open(path, "rb") as f:
        header_line = f.readline()
        payload = f.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ShapeMismatchError(f"{path}: unreadable tensor header: {e}") from e

    for key in ("dims", "dtype", "mode", "reg_max", "nc", "strides"):
        if key not in header:
            raise ShapeMismatchError(f"{path}: tensor header missing {key!r}")
    if header["dtype"] != "f32":
        raise ShapeMismatchError(f"{path}: unsupported dtype {header['dtype']!r}")
    if header["mode"] not in MODES:
        raise ShapeMismatchError(f"{path}: unknown mode {header['mode']!r}")

    dims = [int(d) for d in header["dims"]]
    expected = int(np.prod(dims)) * 4
    if len(payload) != expected:
        raise ShapeMismatchError(
            f"{path}: payload is {len(payload)} bytes, dims {dims} need {expected}"
        )
    array = np.frombuffer(payload, dtype="<f4").reshape(dims)
    return header, array
