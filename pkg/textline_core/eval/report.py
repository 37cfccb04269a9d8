"""
Table emission: per-level accuracy and precision/recall/F (CSV + plain text),
and the hidden-unit sweep.
"""
import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Union

import numpy as np

from ..utils.errors import EvaluationError
from ..utils.logger import get_logger
from .metrics import f_measure

logger = get_logger(__name__)

LEVEL_COLUMNS = ["level", "accuracy_mean", "accuracy_std", "precision", "recall",
                 "f_measure", "sequence_accuracy"]
SWEEP_COLUMNS = ["hidden_units", "accuracy_mean", "accuracy_std"]


@dataclass
class LevelResult:
    """Raw per-seed scores of one pyramid level (or "whole")."""

    level: Union[int, str]
    accuracies: List[float] = field(default_factory=list)
    precisions: List[float] = field(default_factory=list)
    recalls: List[float] = field(default_factory=list)
    sequence_accuracies: List[float] = field(default_factory=list)


@dataclass
class LevelReport:
    level: Union[int, str]
    accuracy_mean: float
    accuracy_std: float
    precision: float
    recall: float
    f_measure: float
    sequence_accuracy: float


def _mean_std(values, what):
    if len(values) < 2:
        raise EvaluationError(f"{what}: need at least 2 seed repetitions for a standard deviation, got {len(values)}")
    values = np.asarray(values, dtype=np.float64)
    return float(values.mean()), float(values.std(ddof=1))


def summarize_level(result):
    """
    Collapse per-seed scores into one table row.

    P and R are averaged over seeds and rounded to 2 decimals; F is the
    harmonic mean of those rounded values.
    """
    label = f"level {result.level}"
    accuracy_mean, accuracy_std = _mean_std(result.accuracies, label)
    precision = round(float(np.mean(result.precisions)), 2)
    recall = round(float(np.mean(result.recalls)), 2)
    sequence_accuracy = float(np.mean(result.sequence_accuracies)) if result.sequence_accuracies else 0.0
    return LevelReport(
        level=result.level,
        accuracy_mean=accuracy_mean,
        accuracy_std=accuracy_std,
        precision=precision,
        recall=recall,
        f_measure=f_measure(precision, recall),
        sequence_accuracy=sequence_accuracy,
    )


def level_label(level):
    """Display name: py-1 for the base level, py-2 for the next, ..."""
    return "whole" if level == "whole" else f"py-{int(level) + 1}"


def render_levels_table(reports):
    """Plain-text rendering of the level table."""
    lines = [
        f"{'Pyramid Image':<14} {'Accuracy':>16} {'Precision':>10} {'Recall':>8} {'F-measure':>10}",
        "-" * 62,
    ]
    for r in reports:
        accuracy = f"{r.accuracy_mean:.2f} ± {r.accuracy_std:.2f}"
        lines.append(
            f"{level_label(r.level):<14} {accuracy:>16} {r.precision:>10.2f} {r.recall:>8.2f} {r.f_measure:>10.2f}"
        )
    return "\n".join(lines) + "\n"


def _ordered(results):
    per_level = sorted((r for r in results if r.level != "whole"), key=lambda r: int(r.level))
    whole = [r for r in results if r.level == "whole"]
    return per_level + whole


def report_levels(per_level_results, out_path):
    """
    Write the per-level table as CSV plus a .txt rendering next to it.

    Args:
        per_level_results: List of LevelResult (each with >= 2 seeds); a "whole" result goes last
        out_path: CSV path

    Returns:
        List of LevelReport in row order
    """
    results = list(per_level_results)
    if not results:
        raise EvaluationError("no level results to report")
    reports = [summarize_level(r) for r in _ordered(results)]

    out_path = Path(out_path)
    try:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with open(out_path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(LEVEL_COLUMNS)
            for r in reports:
                writer.writerow([
                    r.level,
                    f"{r.accuracy_mean:.2f}",
                    f"{r.accuracy_std:.2f}",
                    f"{r.precision:.2f}",
                    f"{r.recall:.2f}",
                    f"{r.f_measure:.2f}",
                    f"{r.sequence_accuracy:.2f}",
                ])
        out_path.with_suffix(".txt").write_text(render_levels_table(reports), encoding="utf-8")
    except OSError as e:
        raise EvaluationError(f"{out_path}: cannot write report ({e})") from e

    logger.info(f"Level report written to {out_path} ({len(reports)} rows)")
    return reports


def report_sweep(sweep_results, out_path):
    """
    Write the hidden-unit sweep table (accuracy mean ± std per unit count).

    Args:
        sweep_results: Mapping hidden_units -> list of per-seed accuracies (>= 2 each)
        out_path: CSV path

    Returns:
        List of (hidden_units, mean, std) rows
    """
    rows = []
    for units in sorted(sweep_results):
        mean, std = _mean_std(sweep_results[units], f"{units} hidden units")
        rows.append((int(units), mean, std))

    out_path = Path(out_path)
    try:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with open(out_path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(SWEEP_COLUMNS)
            for units, mean, std in rows:
                writer.writerow([units, f"{mean:.2f}", f"{std:.2f}"])
        header = "MDLSTM Memory block " + " ".join(f"{units:>15}" for units, _, _ in rows)
        values = "Accuracy            " + " ".join(f"{f'{m:.2f} ± {s:.2f}':>15}" for _, m, s in rows)
        out_path.with_suffix(".txt").write_text(header + "\n" + values + "\n", encoding="utf-8")
    except OSError as e:
        raise EvaluationError(f"{out_path}: cannot write report ({e})") from e

    logger.info(f"Sweep report written to {out_path}")
    return rows
