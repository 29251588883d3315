"""Model scoring: detection matching, AP/mAP, confusion matrix, curves."""

from mslkit.evaluation.confusion import confusion_matrix, normalize_confusion
from mslkit.evaluation.curves import EpochRecord, TrainingCurve, parse_training_log
from mslkit.evaluation.matching import MatchResult, match
from mslkit.evaluation.metrics import COCO_THRESHOLDS, MapResult, average_precision, map_at
from mslkit.evaluation.report import EvalReport, emit_curves, emit_report, evaluate, report_from_json

__all__ = [
    "confusion_matrix",
    "normalize_confusion",
    "EpochRecord",
    "TrainingCurve",
    "parse_training_log",
    "MatchResult",
    "match",
    "COCO_THRESHOLDS",
    "MapResult",
    "average_precision",
    "map_at",
    "EvalReport",
    "emit_curves",
    "emit_report",
    "evaluate",
    "report_from_json",
]
