"""Recognition metrics and table reports."""
from .metrics import (
    accuracy_percent,
    character_error_rate,
    f_measure,
    levenshtein,
    precision_recall_f,
    sequence_accuracy,
)
from .report import LevelReport, LevelResult, report_levels, report_sweep

__all__ = [
    "LevelReport",
    "LevelResult",
    "accuracy_percent",
    "character_error_rate",
    "f_measure",
    "levenshtein",
    "precision_recall_f",
    "report_levels",
    "report_sweep",
    "sequence_accuracy",
]
