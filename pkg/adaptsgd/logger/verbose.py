"""
Verbose printing for adaptsgd using rich.

Everything goes to stderr so CSV written to stdout stays machine-readable.
Uses a "Tokyo Night" inspired color theme.
"""

from typing import Any

from rich.console import Console
from rich.panel import Panel
from rich.rule import Rule
from rich.style import Style
from rich.table import Table
from rich.text import Text

from adaptsgd.core.types import BoundValue, CheckResult, EnsembleRecord, RunMetadata, StudyRow

# ============================================================================
# Tokyo Night Color Theme
# ============================================================================
COLORS = {
    "primary": "#7AA2F7",  # Soft blue - headers, titles
    "secondary": "#BB9AF7",  # Soft purple - emphasis
    "success": "#9ECE6A",  # Soft green - passed checks
    "warning": "#E0AF68",  # Soft amber - bounds
    "error": "#F7768E",  # Soft red/pink - failures
    "text": "#A9B1D6",  # Soft gray-blue - regular text
    "muted": "#565F89",  # Muted gray - less important
    "accent": "#7DCFFF",  # Bright cyan - accents
    "border": "#3B4261",  # Border color
}

STYLE_PRIMARY = Style(color=COLORS["primary"], bold=True)
STYLE_SECONDARY = Style(color=COLORS["secondary"])
STYLE_SUCCESS = Style(color=COLORS["success"])
STYLE_WARNING = Style(color=COLORS["warning"])
STYLE_ERROR = Style(color=COLORS["error"])
STYLE_TEXT = Style(color=COLORS["text"])
STYLE_MUTED = Style(color=COLORS["muted"])
STYLE_ACCENT = Style(color=COLORS["accent"], bold=True)


def _fmt(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


class VerbosePrinter:
    """
    Rich console printer for adaptsgd output.

    - configuration panel for the invocation
    - one line per ensemble record or study row
    - check tables for `verify` and embedded study assertions
    - bound term breakdowns
    """

    def __init__(self, enabled: bool = True):
        """
        Args:
            enabled: Whether verbose printing is enabled. If False, all methods are no-ops.
        """
        self.enabled = enabled
        self.console = Console(stderr=True) if enabled else None
        self._record_count = 0

    def print_metadata(self, metadata: RunMetadata) -> None:
        """Print the invocation as a header panel."""
        if not self.enabled:
            return

        title = Text()
        title.append("◆ ", style=STYLE_ACCENT)
        title.append("adaptsgd", style=STYLE_PRIMARY)
        title.append(f" ━ {metadata.command}", style=STYLE_MUTED)
        if metadata.target:
            title.append(f" {metadata.target}", style=STYLE_SECONDARY)

        config_table = Table(show_header=False, show_edge=False, box=None, padding=(0, 2))
        config_table.add_column("key", style=STYLE_MUTED, width=24)
        config_table.add_column("value", style=STYLE_TEXT)
        for key, value in metadata.config.items():
            config_table.add_row(key, Text(_fmt(value), style=STYLE_SECONDARY))
        config_table.add_row("jobs", Text(str(metadata.jobs), style=STYLE_WARNING))

        self.console.print()
        self.console.print(
            Panel(
                config_table,
                title=title,
                title_align="left",
                border_style=COLORS["border"],
                padding=(1, 2),
            )
        )

    def print_record(self, record: EnsembleRecord | StudyRow) -> None:
        """One line per completed ensemble."""
        if not self.enabled:
            return

        self._record_count += 1
        line = Text()
        line.append("▸ ", style=STYLE_SUCCESS)
        line.append(f"{record.schedule:<16}", style=STYLE_ACCENT)
        if record.level is not None:
            line.append(f" σ={_fmt(record.level):<8}", style=STYLE_SECONDARY)
        line.append(f" T={record.T:<8}", style=STYLE_TEXT)
        line.append(f" mean_gap={_fmt(record.mean_gap)}", style=STYLE_TEXT)
        ci = record.ci95_halfwidth if isinstance(record, EnsembleRecord) else record.ci95
        line.append(f" ±{_fmt(ci)}", style=STYLE_MUTED)
        bound = getattr(record, "bound", None)
        if bound is not None:
            style = STYLE_SUCCESS if record.within_bound else STYLE_ERROR
            line.append(f"  bound={_fmt(bound)}", style=style)
        self.console.print(line)

    def print_checks(self, title: str, checks: list[CheckResult]) -> None:
        """Pass/fail table; always shown by `verify`."""
        if not self.enabled:
            return

        table = Table(title=title, title_style=STYLE_PRIMARY, border_style=COLORS["border"])
        table.add_column("check", style=STYLE_TEXT)
        table.add_column("result")
        table.add_column("detail", style=STYLE_MUTED)
        for check in checks:
            if check.passed:
                result = Text("pass", style=STYLE_SUCCESS)
            else:
                result = Text("FAIL", style=STYLE_ERROR)
            table.add_row(check.name, result, check.detail)
        self.console.print(table)

    def print_bound(self, bound: BoundValue) -> None:
        """Term breakdown of a bound evaluation."""
        if not self.enabled:
            return

        table = Table(show_header=False, show_edge=False, box=None, padding=(0, 2))
        table.add_column("term", style=STYLE_MUTED)
        table.add_column("value", style=STYLE_TEXT)
        for term in bound.terms:
            table.add_row(term.name, _fmt(term.value))
        table.add_row("total", Text(_fmt(bound.total), style=STYLE_WARNING))

        title = Text()
        title.append("★ ", style=STYLE_WARNING)
        title.append(bound.theorem, style=Style(color=COLORS["warning"], bold=True))
        self.console.print(
            Panel(table, title=title, title_align="left", border_style=COLORS["warning"])
        )

    def print_summary(self, total_time: float, outputs: list[str] | None = None) -> None:
        """Print a summary at the end of execution."""
        if not self.enabled:
            return

        summary_table = Table(show_header=False, show_edge=False, box=None, padding=(0, 2))
        summary_table.add_column("metric", style=STYLE_MUTED)
        summary_table.add_column("value", style=STYLE_ACCENT)
        summary_table.add_row("Records", str(self._record_count))
        summary_table.add_row("Total Time", f"{total_time:.2f}s")
        for path in outputs or []:
            summary_table.add_row("Wrote", path)

        self.console.print()
        self.console.print(Rule(style=COLORS["border"], characters="═"))
        self.console.print(summary_table, justify="center")
        self.console.print(Rule(style=COLORS["border"], characters="═"))
