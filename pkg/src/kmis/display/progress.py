"""Live progress tree for experiment sweeps.

One branch per sweep value shows completed/total trials; a branch turns into
a done or error icon once all its trials finished. Worker threads report
through :meth:`SweepProgressDisplay.trial_done`.

Dependencies: errors (rich)
Wired in: cli.py → run (unless --no-progress)
"""

from __future__ import annotations

import threading
import time
from collections.abc import Sequence
from dataclasses import dataclass
from types import TracebackType
from typing import Final, Literal

from kmis.errors import InvalidInputError

try:
    from rich.console import Console
    from rich.live import Live
    from rich.tree import Tree
except ModuleNotFoundError as exc:
    missing_package = exc.name or "unknown package"
    raise SystemExit(
        f"Missing display dependency package `{missing_package}`. "
        "Install the project so `rich>=13.0` is available."
    ) from exc

ChannelStatus = Literal["running", "done", "error"]

_SPINNER_FRAMES: Final[tuple[str, ...]] = ("⠋", "⠙", "⠹", "⠸", "⠼", "⠴", "⠦", "⠧")
_DONE_ICON: Final[str] = "✔"
_ERROR_ICON: Final[str] = "✖"
_REFRESH_PER_SEC: Final[int] = 4


@dataclass
class SweepChannel:
    """Progress of the trials at one sweep value."""

    label: str
    total: int
    completed: int = 0
    failed: int = 0
    order: int = 0

    @property
    def status(self) -> ChannelStatus:
        if self.completed < self.total:
            return "running"
        return "error" if self.failed else "done"


class SweepProgressDisplay:
    """Thread-safe live tree of sweep progress; use as a context manager."""

    def __init__(
        self,
        axis: str,
        values: Sequence[float],
        trials_per_value: int,
        *,
        console: Console | None = None,
    ) -> None:
        if trials_per_value < 1:
            raise InvalidInputError("trials_per_value must be >= 1")
        self._console = console or Console(stderr=True)
        self._axis = axis
        self._channels: dict[float, SweepChannel] = {
            value: SweepChannel(label=f"{axis}={value:g}", total=trials_per_value, order=i)
            for i, value in enumerate(values)
        }
        self._lock = threading.RLock()
        self._closed = False
        self._live = Live(
            console=self._console,
            auto_refresh=True,
            refresh_per_second=_REFRESH_PER_SEC,
            transient=True,
            get_renderable=self._render_tree,
        )
        self._live.start()

    def __enter__(self) -> SweepProgressDisplay:
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        self.close()

    def trial_done(self, sweep_value: float, failed: bool) -> None:
        with self._lock:
            channel = self._channels.get(sweep_value)
            if channel is None or self._closed:
                return
            channel.completed += 1
            if failed:
                channel.failed += 1

    def snapshot(self) -> dict[float, SweepChannel]:
        """Copies of the channel state, keyed by sweep value."""
        with self._lock:
            return {
                value: SweepChannel(ch.label, ch.total, ch.completed, ch.failed, ch.order)
                for value, ch in self._channels.items()
            }

    def close(self) -> None:
        """Stop the live tree and print one plain line per sweep value."""
        with self._lock:
            if self._closed:
                return
            self._closed = True
            channels = sorted(self._channels.values(), key=lambda c: c.order)
        self._live.stop()
        for ch in channels:
            line = f"  {self._plain_icon(ch.status)} {ch.label}: {ch.completed}/{ch.total} trials"
            if ch.failed:
                line += f", {ch.failed} with errors"
            self._console.print(line, style="red" if ch.failed else None, highlight=False)

    # -- rendering -----------------------------------------------------------

    def _render_tree(self) -> Tree:
        with self._lock:
            channels = sorted(self._channels.values(), key=lambda c: c.order)
            frame = int(time.monotonic() * 10) % len(_SPINNER_FRAMES)
        root = Tree(f"[bold]{self._axis} sweep[/bold]")
        for ch in channels:
            icon = self._icon(ch.status, frame)
            label = f"{icon} {ch.label} [dim]{ch.completed}/{ch.total}[/dim]"
            if ch.failed:
                label += f" [red]{ch.failed} failed[/red]"
            root.add(label)
        return root

    def _icon(self, status: ChannelStatus, frame: int) -> str:
        if status == "running":
            return f"[yellow]{_SPINNER_FRAMES[frame]}[/yellow]"
        if status == "done":
            return f"[green]{_DONE_ICON}[/green]"
        return f"[red]{_ERROR_ICON}[/red]"

    @staticmethod
    def _plain_icon(status: ChannelStatus) -> str:
        return {"running": "…", "done": _DONE_ICON, "error": _ERROR_ICON}[status]
