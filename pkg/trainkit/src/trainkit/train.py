"""Training loop: fine-tune or train the compact detector on a manifest.

Defaults follow the usual recipe: 100 epochs with early stopping at 10
stagnant epochs, the best checkpoint picked on the validation loss and
saved as weights/best.pt under the run directory, and a results.csv in
the standard padded column layout.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch
import yaml

from trainkit.data import load_example, load_manifest, load_split
from trainkit.loss import detection_loss
from trainkit.metrics import decode_predictions, evaluate_split
from trainkit.model import Decoder, Detector, STRIDES

RESULTS_COLUMNS = (
    "epoch",
    "train/box_loss",
    "train/cls_loss",
    "train/dfl_loss",
    "metrics/precision(B)",
    "metrics/recall(B)",
    "metrics/mAP50(B)",
    "metrics/mAP50-95(B)",
    "val/box_loss",
    "val/cls_loss",
    "val/dfl_loss",
    "lr/pg0",
)

# tiny datasets repeat within an epoch so one "epoch" still takes
# a useful number of optimizer steps
MIN_SAMPLES_PER_EPOCH = 16


@dataclass
class TrainSpec:
    data: str
    epochs: int = 100
    patience: int = 10
    imgsz: int = 160
    batch_size: int = 8
    lr: float = 5e-3
    seed: int = 0
    out: str = "runs/train"
    width: int = 32
    reg_max: int = 16
    weights: str | None = None  # optional init checkpoint for transfer learning

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.imgsz % 32:
            raise ValueError(f"imgsz {self.imgsz} must be a multiple of 32")


def _format_row(cells) -> str:
    return ",".join(f"{c:>20}" for c in cells)


def _load_all(samples, size):
    return [load_example(s, size) for s in samples]


def train(spec: TrainSpec) -> Path:
    torch.manual_seed(spec.seed)
    np.random.seed(spec.seed)

    manifest = load_manifest(spec.data)
    nc = manifest.nc
    # dataset problems surface here, before any training work
    train_samples = load_split(manifest, "train", nc)
    val_samples = load_split(manifest, "val", nc) if "val" in manifest.splits else []
    if not train_samples:
        raise ValueError("training split is empty")
    if not val_samples:
        val_samples = train_samples

    train_data = _load_all(train_samples, spec.imgsz)
    val_data = _load_all(val_samples, spec.imgsz)

    model = Detector(nc=nc, reg_max=spec.reg_max, width=spec.width)
    if spec.weights:
        state = torch.load(spec.weights, map_location="cpu")
        state = state.get("model_state", state)
        missing, unexpected = model.load_state_dict(state, strict=False)
        print(f"loaded init weights: {len(missing)} missing, {len(unexpected)} unexpected keys")
    decoder = Decoder(spec.reg_max, nc, spec.imgsz, STRIDES)
    optimizer = torch.optim.Adam(model.parameters(), lr=spec.lr)

    run_dir = Path(spec.out)
    weights_dir = run_dir / "weights"
    weights_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "args.yaml").write_text(yaml.safe_dump(asdict(spec), sort_keys=False))

    rng = np.random.default_rng(spec.seed)
    rows = []
    best_fitness = math.inf
    stale = 0

    for epoch in range(1, spec.epochs + 1):
        model.train()
        repeats = max(1, math.ceil(MIN_SAMPLES_PER_EPOCH / len(train_data)))
        order = np.concatenate([rng.permutation(len(train_data)) for _ in range(repeats)])
        sums = {"box": 0.0, "cls": 0.0, "dfl": 0.0}
        steps = 0
        for start in range(0, len(order), spec.batch_size):
            chunk = order[start : start + spec.batch_size]
            x = torch.from_numpy(np.stack([train_data[i][0] for i in chunk]))
            boxes = [torch.from_numpy(train_data[i][1]) for i in chunk]
            losses = detection_loss(model(x), boxes, decoder, spec.imgsz, STRIDES)
            optimizer.zero_grad()
            losses["total"].backward()
            optimizer.step()
            for key in sums:
                sums[key] += float(losses[key].detach())
            steps += 1
        train_losses = {k: v / steps for k, v in sums.items()}

        model.eval()
        val_sums = {"box": 0.0, "cls": 0.0, "dfl": 0.0, "total": 0.0}
        predictions, ground_truths = [], []
        with torch.no_grad():
            for tensor, boxes in val_data:
                x = torch.from_numpy(tensor).unsqueeze(0)
                levels = model(x)
                losses = detection_loss(levels, [torch.from_numpy(boxes)], decoder, spec.imgsz, STRIDES)
                for key in val_sums:
                    val_sums[key] += float(losses[key])
                pre = decoder(levels).squeeze(0).numpy()
                predictions.append(decode_predictions(pre))
                gt_xyxy = [
                    [cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2]
                    for _, cx, cy, w, h in boxes
                ]
                ground_truths.append((gt_xyxy, [int(c) for c, *_ in boxes]))
        val_losses = {k: v / len(val_data) for k, v in val_sums.items()}
        metrics = evaluate_split(predictions, ground_truths, nc)

        rows.append(
            [
                epoch,
                f"{train_losses['box']:.5f}",
                f"{train_losses['cls']:.5f}",
                f"{train_losses['dfl']:.5f}",
                f"{metrics['precision']:.5f}",
                f"{metrics['recall']:.5f}",
                f"{metrics['map50']:.5f}",
                f"{metrics['map50_95']:.5f}",
                f"{val_losses['box']:.5f}",
                f"{val_losses['cls']:.5f}",
                f"{val_losses['dfl']:.5f}",
                f"{spec.lr:.5f}",
            ]
        )
        print(
            f"epoch {epoch}/{spec.epochs} "
            f"train box {train_losses['box']:.3f} cls {train_losses['cls']:.3f} "
            f"dfl {train_losses['dfl']:.3f} | val loss {val_losses['total']:.3f} "
            f"mAP50 {metrics['map50']:.3f}"
        )

        checkpoint = {
            "model_state": model.state_dict(),
            "nc": nc,
            "reg_max": spec.reg_max,
            "width": spec.width,
            "imgsz": spec.imgsz,
            "strides": list(STRIDES),
            "names": manifest.names,
            "epoch": epoch,
            "val_loss": val_losses["total"],
        }
        torch.save(checkpoint, weights_dir / "last.pt")
        fitness = val_losses["total"]
        if fitness < best_fitness - 1e-9:
            best_fitness = fitness
            stale = 0
            torch.save(checkpoint, weights_dir / "best.pt")
        else:
            stale += 1
        if stale >= spec.patience:
            print(f"early stop at epoch {epoch}: no improvement for {spec.patience} epoch(s)")
            break

    header = _format_row(RESULTS_COLUMNS)
    body = "\n".join(_format_row(row) for row in rows)
    (run_dir / "results.csv").write_text(header + "\n" + body + "\n")
    return run_dir
