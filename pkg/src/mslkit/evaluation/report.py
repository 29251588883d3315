"""Evaluation reports: assembly, JSON/CSV emission, and round-tripping."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

from mslkit.decode import Detection
from mslkit.errors import IoFailureError
from mslkit.evaluation.confusion import confusion_matrix, normalize_confusion
from mslkit.evaluation.curves import TrainingCurve
from mslkit.evaluation.matching import GroundTruth
from mslkit.evaluation.metrics import COCO_THRESHOLDS, map_at

SCHEMA_VERSION = 1


@dataclass
class EvalReport:
    schema_version: int
    nc: int
    names: list[str]
    thresholds: list[float]
    per_class_ap50: list[float | None]
    map50: float
    map50_95: float
    precision: float
    recall: float
    confusion: list[list[int]]
    confusion_normalized: list[list[float]]
    counts: dict


def evaluate(
    preds_by_image: Sequence[Sequence[Detection]],
    gts_by_image: Sequence[Sequence[GroundTruth]],
    nc: int,
    names: list[str] | None = None,
    conf: float = 0.25,
    confusion_iou: float = 0.45,
    thresholds: Sequence[float] = COCO_THRESHOLDS,
) -> EvalReport:
    """Score predictions against ground truth into a full report.

    AP/mAP use every supplied prediction; the confusion matrix applies its
    own confidence cut (conf) and class-agnostic IoU matching.
    """
    names = list(names) if names else [str(c) for c in range(nc)]
    result = map_at(preds_by_image, gts_by_image, nc, thresholds)
    matrix = confusion_matrix(preds_by_image, gts_by_image, nc, conf, confusion_iou)
    per_image_counts = {
        "images": len(list(preds_by_image)),
        "predictions": result.n_predictions,
        "ground_truths": result.n_gts,
    }
    return EvalReport(
        schema_version=SCHEMA_VERSION,
        nc=nc,
        names=names,
        thresholds=[float(t) for t in result.thresholds],
        per_class_ap50=result.per_class_ap[result.thresholds[0]],
        map50=result.map50,
        map50_95=result.map50_95,
        precision=result.precision,
        recall=result.recall,
        confusion=matrix.tolist(),
        confusion_normalized=normalize_confusion(matrix).tolist(),
        counts=per_image_counts,
    )


def emit_report(report: EvalReport, out_dir: str | Path) -> list[Path]:
    """Write report.json, confusion_matrix.csv, and per_class_ap.csv."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []

        json_path = out_dir / "report.json"
        json_path.write_text(json.dumps(asdict(report), indent=2) + "\n")
        written.append(json_path)

        labels = report.names + ["background"]
        matrix_path = out_dir / "confusion_matrix.csv"
        lines = ["predicted\\gt," + ",".join(labels)]
        for row_label, row in zip(labels, report.confusion):
            lines.append(row_label + "," + ",".join(str(v) for v in row))
        matrix_path.write_text("\n".join(lines) + "\n")
        written.append(matrix_path)

        ap_path = out_dir / "per_class_ap.csv"
        lines = ["class,ap50"]
        for name, ap in zip(report.names, report.per_class_ap50):
            lines.append(f"{name},{'' if ap is None else f'{ap:.6f}'}")
        ap_path.write_text("\n".join(lines) + "\n")
        written.append(ap_path)
        return written
    except OSError as e:
        raise IoFailureError(f"cannot write report to {out_dir}: {e}") from e


def emit_curves(curve: TrainingCurve, out_dir: str | Path) -> list[Path]:
    """Write plot-ready CSV series for losses and detection metrics."""
    out_dir = Path(out_dir)
    loss_fields = [
        "train_box_loss", "train_cls_loss", "train_dfl_loss",
        "val_box_loss", "val_cls_loss", "val_dfl_loss",
    ]
    metric_fields = ["precision", "recall", "map50", "map50_95"]
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for filename, columns in (("loss_curves.csv", loss_fields), ("metric_curves.csv", metric_fields)):
            lines = ["epoch," + ",".join(columns)]
            for record in curve.records:
                cells = [str(record.epoch)]
                for column in columns:
                    value = getattr(record, column)
                    cells.append("" if value is None else f"{value:.6f}")
                lines.append(",".join(cells))
            path = out_dir / filename
            path.write_text("\n".join(lines) + "\n")
            written.append(path)
        return written
    except OSError as e:
        raise IoFailureError(f"cannot write curves to {out_dir}: {e}") from e


def report_from_json(text: str) -> EvalReport:
    data = json.loads(text)
    return EvalReport(**data)
