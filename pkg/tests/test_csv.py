"""Tests for CSV output helpers."""

import math

import numpy as np

from adaptsgd.core.types import BoundTerm, BoundValue, CheckResult, RateFit, RunTrace, StudyReport
from adaptsgd.utils.csv_utils import (
    bound_rows,
    csv_text,
    format_cell,
    rates_rows,
    trace_rows,
    write_csv,
)


class TestFormatCell:
    """Tests for format_cell."""

    def test_floats_keep_full_precision(self):
        value = 0.1 + 0.2
        assert float(format_cell(value)) == value

    def test_other_values(self):
        assert format_cell(None) == ""
        assert format_cell(True) == "true"
        assert format_cell(np.int64(3)) == "3"
        assert format_cell(math.inf) == "inf"


class TestCsvOutput:
    """Tests for csv_text, write_csv and the row helpers."""

    def test_csv_text(self):
        text = csv_text(("a", "b"), [(1, 0.5), ("x", None)])
        assert text == "a,b\n1,0.5\nx,\n"

    def test_write_creates_directories(self, tmp_path):
        path = write_csv(str(tmp_path / "nested" / "out.csv"), ("t",), [(1,)])
        with open(path) as f:
            assert f.read() == "t\n1\n"

    def test_trace_rows_start_at_first_index(self):
        trace = RunTrace(
            eta=np.array([1.0, 0.5]),
            value_gap=np.array([1.0, 0.25]),
            grad_sq=np.array([2.0, 0.5]),
            final_point=np.zeros(1),
            final_gap=0.0,
            first_index=0,
        )
        assert list(trace_rows(trace)) == [(0, 1.0, 1.0, 2.0), (1, 0.5, 0.25, 0.5)]

    def test_rates_rows_pass_per_schedule(self):
        report = StudyReport(
            name="rates",
            fits={"cosine": RateFit(-1.0, 0.0, 1.0), "constant": RateFit(0.0, 0.0, 0.5)},
            checks=[
                CheckResult("cosine r^2", True),
                CheckResult("constant r^2", False),
            ],
        )
        rows = {row[0]: row[-1] for row in rates_rows(report)}
        assert rows == {"cosine": True, "constant": False}

    def test_bound_rows(self):
        bound = BoundValue.from_terms("cos-pl", [BoundTerm("transient", 0.5)])
        assert list(bound_rows(bound)) == [("cos-pl", "transient", 0.5, 0.5)]
