"""Leading-order MSE of kernel IS and its closed-form minimizer.

``LOMSE(h) = h^4 C_b + C_v / (N h^D)`` is minimized at
``h* = (D C_v / (4 N C_b))^(1 / (D + 4))``, where the squared bias is exactly
``D / 4`` times the variance term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from kmis.errors import DegenerateBiasError, InvalidInputError


@dataclass(frozen=True)
class LomseConstants:
    """Plug-in constants of the leading-order MSE."""

    c_b: float
    """Squared leading bias constant, ``>= 0``."""

    c_v: float
    """Leading variance constant, ``>= 0``."""

    n: int
    """Number of logged samples."""

    d_a: int
    """Action dimension."""

    def __post_init__(self) -> None:
        if not (math.isfinite(self.c_b) and self.c_b >= 0.0):
            raise InvalidInputError(f"c_b must be finite and >= 0, got {self.c_b}")
        if not (math.isfinite(self.c_v) and self.c_v >= 0.0):
            raise InvalidInputError(f"c_v must be finite and >= 0, got {self.c_v}")
        if self.n < 1 or self.d_a < 1:
            raise InvalidInputError(f"n and d_a must be >= 1, got n={self.n}, d_a={self.d_a}")


def lomse(h: float, k: LomseConstants) -> float:
    if not h > 0.0:
        raise InvalidInputError(f"Bandwidth must be > 0, got {h}")
    return h**4 * k.c_b + k.c_v / (k.n * h**k.d_a)


def optimal_bandwidth(k: LomseConstants) -> float:
    """Bandwidth minimizing :func:`lomse`.

    Raises:
        DegenerateBiasError: ``c_b == 0`` (the minimizer diverges).
        InvalidInputError: ``c_v == 0`` (the minimizer collapses to zero).
    """
    if k.c_b == 0.0:
        raise DegenerateBiasError("Leading bias constant is zero; optimal bandwidth diverges")
    if k.c_v == 0.0:
        raise InvalidInputError("Leading variance constant is zero; optimal bandwidth is zero")
    return (k.d_a * k.c_v / (4.0 * k.n * k.c_b)) ** (1.0 / (k.d_a + 4))
