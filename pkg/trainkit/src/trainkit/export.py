"""Export a trained run as a TorchScript bundle plus metadata JSON."""

from __future__ import annotations

import json
import shutil
from pathlib import Path

import torch

from trainkit.model import Detector, ExportPretransformed, ExportRaw


def export(run_dir: str | Path, mode: str = "pretransformed", out_dir: str | Path | None = None) -> Path:
    """Write model.torchscript, metadata.json, and the results.csv copy.

    The metadata declares the output mode so the consuming decoder picks
    the matching path; the traced graph is validated against the declared
    shapes before anything is written.
    """
    if mode not in ("pretransformed", "raw"):
        raise ValueError(f"mode must be pretransformed or raw, got {mode!r}")
    run_dir = Path(run_dir)
    checkpoint_path = run_dir / "weights" / "best.pt"
    if not checkpoint_path.is_file():
        raise FileNotFoundError(f"no best checkpoint at {checkpoint_path}")
    checkpoint = torch.load(checkpoint_path, map_location="cpu")

    model = Detector(nc=checkpoint["nc"], reg_max=checkpoint["reg_max"], width=checkpoint["width"])
    model.load_state_dict(checkpoint["model_state"])
    model.eval()
    size = int(checkpoint["imgsz"])
    strides = [int(s) for s in checkpoint["strides"]]

    wrapper = ExportPretransformed(model, size) if mode == "pretransformed" else ExportRaw(model)
    wrapper.eval()
    example = torch.zeros(1, 3, size, size)
    with torch.no_grad():
        traced = torch.jit.trace(wrapper, example)
        output = traced(example)

    n_anchors = sum((size // s) ** 2 for s in strides)
    if mode == "pretransformed":
        expect = (1, 4 + checkpoint["nc"], n_anchors)
        if tuple(output.shape) != expect:
            raise RuntimeError(f"traced output {tuple(output.shape)} != declared {expect}")
    else:
        shapes = [tuple(level.shape) for level in output]
        expects = [
            (1, 4 * checkpoint["reg_max"] + checkpoint["nc"], size // s, size // s) for s in strides
        ]
        if shapes != expects:
            raise RuntimeError(f"traced outputs {shapes} != declared {expects}")

    out_dir = Path(out_dir) if out_dir else run_dir / "export"
    out_dir.mkdir(parents=True, exist_ok=True)
    traced.save(str(out_dir / "model.torchscript"))

    metadata = {
        "mode": mode,
        "reg_max": int(checkpoint["reg_max"]),
        "nc": int(checkpoint["nc"]),
        "strides": strides,
        "input_w": size,
        "input_h": size,
        "names": [str(n) for n in checkpoint["names"]],
    }
    (out_dir / "metadata.json").write_text(json.dumps(metadata, indent=2) + "\n")

    results = run_dir / "results.csv"
    if results.is_file():
        shutil.copyfile(results, out_dir / "results.csv")

    print(f"exported to {out_dir}")
    print(f"consume with: mslkit detect --source <frames> --model {out_dir / 'metadata.json'}")
    return out_dir
