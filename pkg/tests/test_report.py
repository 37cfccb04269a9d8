"""Level and sweep tables."""
import csv

import pytest

from textline_core.eval import LevelResult, report_levels, report_sweep
from textline_core.utils.errors import EvaluationError


def _rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


class TestReportLevels:
    def test_csv_layout(self, tmp_path):
        results = [
            LevelResult("whole", [82.0, 83.0], [0.9, 0.9], [0.8, 0.8], [0.5, 0.5]),
            LevelResult(1, [70.0, 72.0], [0.60, 0.60], [0.47, 0.47], [0.1, 0.3]),
            LevelResult(0, [77.0, 77.6], [0.82, 0.82], [0.74, 0.74], [0.4, 0.4]),
        ]
        out = tmp_path / "levels.csv"
        reports = report_levels(results, out)
        rows = _rows(out)
        assert rows[0] == ["level", "accuracy_mean", "accuracy_std", "precision", "recall", "f_measure",
                           "sequence_accuracy"]
        assert [row[0] for row in rows[1:]] == ["0", "1", "whole"]
        assert rows[1][1:6] == ["77.30", "0.42", "0.82", "0.74", "0.78"]
        assert rows[2][5] == "0.53"
        assert rows[2][6] == "0.20"
        assert [r.level for r in reports] == [0, 1, "whole"]

    def test_sample_standard_deviation(self, tmp_path):
        (report,) = report_levels([LevelResult(0, [1.0, 2.0, 3.0], [1, 1, 1], [1, 1, 1])], tmp_path / "l.csv")
        assert report.accuracy_std == pytest.approx(1.0)

    def test_text_rendering(self, tmp_path):
        report_levels([LevelResult(0, [77.0, 77.6], [0.82, 0.82], [0.74, 0.74])], tmp_path / "l.csv")
        text = (tmp_path / "l.txt").read_text(encoding="utf-8")
        assert "py-1" in text
        assert "77.30 ± 0.42" in text

    def test_needs_two_seeds(self, tmp_path):
        with pytest.raises(EvaluationError, match="at least 2"):
            report_levels([LevelResult(0, [80.0], [0.8], [0.8])], tmp_path / "l.csv")

    def test_no_results(self, tmp_path):
        with pytest.raises(EvaluationError):
            report_levels([], tmp_path / "l.csv")

    def test_unwritable(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x", encoding="utf-8")
        with pytest.raises(EvaluationError, match="cannot write"):
            report_levels([LevelResult(0, [1.0, 2.0], [1, 1], [1, 1])], blocker / "l.csv")

    def test_deterministic_bytes(self, tmp_path):
        results = [LevelResult(0, [70.123, 71.456], [0.7, 0.71], [0.6, 0.62], [0.2, 0.25])]
        report_levels(results, tmp_path / "a.csv")
        report_levels(results, tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


class TestReportSweep:
    def test_rows_sorted_by_units(self, tmp_path):
        rows = report_sweep({100: [74.0, 76.0], 20: [60.0, 62.0]}, tmp_path / "sweep.csv")
        assert [units for units, _, _ in rows] == [20, 100]
        table = _rows(tmp_path / "sweep.csv")
        assert table[0] == ["hidden_units", "accuracy_mean", "accuracy_std"]
        assert table[1] == ["20", "61.00", "1.41"]
        assert "75.00 ± 1.41" in (tmp_path / "sweep.txt").read_text(encoding="utf-8")

    def test_needs_two_seeds(self, tmp_path):
        with pytest.raises(EvaluationError):
            report_sweep({20: [60.0]}, tmp_path / "sweep.csv")
