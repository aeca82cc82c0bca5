"""Terminal rendering: live sweep progress and aggregate tables."""

from kmis.display.progress import SweepProgressDisplay
from kmis.display.summary import render_summary, summary_table

__all__ = ["SweepProgressDisplay", "render_summary", "summary_table"]
