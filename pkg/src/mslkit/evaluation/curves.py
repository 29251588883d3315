"""Parse training-log CSVs into per-epoch curve records."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, fields

from mslkit.errors import MalformedCsvError, NonNumericCellError

# header name -> record field; tolerant of surrounding whitespace
COLUMN_MAP = {
    "epoch": "epoch",
    "train/box_loss": "train_box_loss",
    "train/cls_loss": "train_cls_loss",
    "train/dfl_loss": "train_dfl_loss",
    "val/box_loss": "val_box_loss",
    "val/cls_loss": "val_cls_loss",
    "val/dfl_loss": "val_dfl_loss",
    "metrics/precision(B)": "precision",
    "metrics/recall(B)": "recall",
    "metrics/mAP50(B)": "map50",
    "metrics/mAP50-95(B)": "map50_95",
}


@dataclass
class EpochRecord:
    epoch: int
    train_box_loss: float | None = None
    train_cls_loss: float | None = None
    train_dfl_loss: float | None = None
    val_box_loss: float | None = None
    val_cls_loss: float | None = None
    val_dfl_loss: float | None = None
    precision: float | None = None
    recall: float | None = None
    map50: float | None = None
    map50_95: float | None = None


@dataclass
class TrainingCurve:
    records: list[EpochRecord]

    def series(self, field_name: str) -> list[tuple[int, float]]:
        """(epoch, value) pairs for one column, skipping absent cells."""
        valid = {f.name for f in fields(EpochRecord)}
        if field_name not in valid:
            raise KeyError(f"unknown curve field {field_name!r}")
        return [
            (r.epoch, getattr(r, field_name))
            for r in self.records
            if getattr(r, field_name) is not None
        ]


def parse_training_log(text: str) -> TrainingCurve:
    """Parse the standard results-CSV layout by header lookup.

    Unknown columns are ignored and missing ones become absent fields.

    Raises:
        MalformedCsvError: no header row or no epoch column.
        NonNumericCellError: a mapped cell fails to parse (row, column).
    """
    rows = [row for row in csv.reader(io.StringIO(text))]
    rows = [row for row in rows if any(cell.strip() for cell in row)]
    if not rows:
        raise MalformedCsvError("training log has no header row")

    header = [cell.strip() for cell in rows[0]]
    positions = {}
    for col, name in enumerate(header):
        if name in COLUMN_MAP:
            positions[COLUMN_MAP[name]] = col
    if "epoch" not in positions:
        raise MalformedCsvError(f"no 'epoch' column in header {header}")

    records = []
    for row_number, row in enumerate(rows[1:], start=2):
        values = {}
        for field_name, col in positions.items():
            cell = row[col].strip() if col < len(row) else ""
            if not cell:
                continue
            try:
                values[field_name] = float(cell)
            except ValueError:
                raise NonNumericCellError(row_number, header[col]) from None
        if "epoch" not in values:
            raise NonNumericCellError(row_number, "epoch")
        values["epoch"] = int(values["epoch"])
        records.append(EpochRecord(**values))

    epochs = [r.epoch for r in records]
    if any(b <= a for a, b in zip(epochs, epochs[1:])):
        raise MalformedCsvError("epochs are not strictly increasing")
    return TrainingCurve(records)
