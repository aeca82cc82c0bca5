"""Rich table of aggregate rows."""

from __future__ import annotations

from collections.abc import Sequence

from rich.console import Console
from rich.table import Table

from kmis.harness.aggregate import AggregateRow


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.4g}"


def summary_table(rows: Sequence[AggregateRow], title: str | None = None) -> Table:
    table = Table(title=title, show_lines=False)
    table.add_column("sweep", justify="right")
    table.add_column("estimator")
    table.add_column("MSE", justify="right")
    table.add_column("± se", justify="right")
    table.add_column("bias²", justify="right")
    table.add_column("variance", justify="right")
    table.add_column("mean h", justify="right")
    table.add_column("trials", justify="right")
    previous: float | None = None
    for row in rows:
        errors = f" [red]({row.n_errors} err)[/red]" if row.n_errors else ""
        table.add_row(
            "" if row.sweep_value == previous else f"{row.sweep_value:g}",
            row.estimator,
            _fmt(row.mse),
            _fmt(row.mse_stderr),
            _fmt(row.bias_squared),
            _fmt(row.variance),
            _fmt(row.mean_bandwidth),
            f"{row.n_trials}{errors}",
        )
        previous = row.sweep_value
    return table


def render_summary(
    rows: Sequence[AggregateRow], console: Console | None = None, title: str | None = None
) -> None:
    (console or Console()).print(summary_table(rows, title))
