"""Descending bandwidth grids and their text form (``"2^-1..2^-7"`` or ``"0.5,0.25"``)."""

from __future__ import annotations

import re
from collections.abc import Iterator
from dataclasses import dataclass

from kmis.errors import InvalidInputError

_POWER_RANGE = re.compile(r"^\s*2\^(-?\d+)\s*\.\.\s*2\^(-?\d+)\s*$")


@dataclass(frozen=True)
class BandwidthGrid:
    """Strictly descending positive bandwidths."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise InvalidInputError("Bandwidth grid is empty")
        if any(not v > 0.0 for v in self.values):
            raise InvalidInputError(f"Bandwidths must be positive: {self.values}")
        if any(b >= a for a, b in zip(self.values, self.values[1:], strict=False)):
            raise InvalidInputError(f"Bandwidths must be strictly descending: {self.values}")

    def __iter__(self) -> Iterator[float]:
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __contains__(self, value: object) -> bool:
        return value in self.values

    @property
    def median(self) -> float:
        """Middle grid value (the larger of the two middles for an even count)."""
        return self.values[(len(self.values) - 1) // 2]

    @classmethod
    def powers_of_two(cls, first: int, last: int) -> BandwidthGrid:
        """``2^first, ..., 2^last`` in descending order, whichever way the range is given."""
        high, low = max(first, last), min(first, last)
        return cls(tuple(2.0**e for e in range(high, low - 1, -1)))

    @classmethod
    def geometric(cls, start: float, ratio: float, count: int) -> BandwidthGrid:
        if not 0.0 < ratio < 1.0 or count < 1:
            raise InvalidInputError("Geometric grid needs 0 < ratio < 1 and count >= 1")
        return cls(tuple(start * ratio**k for k in range(count)))

    @classmethod
    def parse(cls, text: str) -> BandwidthGrid:
        """Parse ``"2^a..2^b"`` or a comma-separated list of bandwidths."""
        if match := _POWER_RANGE.match(text):
            return cls.powers_of_two(int(match.group(1)), int(match.group(2)))
        try:
            values = sorted((float(part) for part in text.split(",") if part.strip()), reverse=True)
        except ValueError as exc:
            raise InvalidInputError(f"Cannot parse bandwidth grid {text!r}") from exc
        return cls(tuple(values))

    def __str__(self) -> str:
        return ",".join(repr(v) for v in self.values)


def synthetic_grid() -> BandwidthGrid:
    return BandwidthGrid.powers_of_two(-1, -7)


def warfarin_grid() -> BandwidthGrid:
    return BandwidthGrid.powers_of_two(2, -7)
