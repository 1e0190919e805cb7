"""CSV helpers. Floats are printed with 17 significant digits so they round-trip exactly."""

import csv
import io
import os
from collections.abc import Iterable, Sequence
from typing import Any

from adaptsgd.core.types import BoundValue, EnsembleRecord, RunTrace, StudyReport

TRACE_HEADER = ("t", "eta", "value_gap", "grad_sq")
SUMMARY_HEADER = ("schedule", "T", "n_seeds", "mean_gap", "std_gap", "ci95")
CURVE_HEADER = ("t", "mean_gap")
STUDY_HEADER = ("level", "schedule", "T", "mean_gap", "ci95", "bound", "within_bound")
RATES_HEADER = ("schedule", "slope", "intercept", "r_squared", "passed")
BOUNDS_HEADER = ("theorem", "term", "value", "total")


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if hasattr(value, "dtype"):
        return format_cell(value.item())
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buffer.getvalue()


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(csv_text(header, rows))
    return path


def trace_rows(trace: RunTrace) -> Iterable[tuple[int, float, float, float]]:
    for k, t in enumerate(trace.steps):
        yield int(t), float(trace.eta[k]), float(trace.value_gap[k]), float(trace.grad_sq[k])


def write_trace_csv(trace: RunTrace, path: str) -> str:
    return write_csv(path, TRACE_HEADER, trace_rows(trace))


def summary_rows(records: Iterable[EnsembleRecord]) -> Iterable[tuple]:
    for r in records:
        yield r.schedule, r.T, r.n_seeds, r.mean_gap, r.std_gap, r.ci95_halfwidth


def study_rows(report: StudyReport) -> Iterable[tuple]:
    for row in report.rows:
        yield row.level, row.schedule, row.T, row.mean_gap, row.ci95, row.bound, row.within_bound


def rates_rows(report: StudyReport) -> Iterable[tuple]:
    """One row per fitted schedule; passed means every check named after it passed."""
    for name, fit in report.fits.items():
        passed = all(c.passed for c in report.checks if c.name.startswith(f"{name} "))
        yield name, fit.slope, fit.intercept, fit.r_squared, passed


def bound_rows(bound: BoundValue) -> Iterable[tuple]:
    for term in bound.terms:
        yield bound.theorem, term.name, term.value, bound.total
