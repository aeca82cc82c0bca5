"""Normal CDF helpers and the truncated normal used by Warfarin behavior policies.

Dependencies: errors, numerics.types
Wired in: policies/behavior.py
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Final

import numpy as np
import numpy.typing as npt
from scipy import special

from kmis.errors import DegenerateTruncationError, InvalidInputError
from kmis.numerics.types import FloatArray

_MIN_MASS: Final[float] = 1e-300
_INV_SQRT_2PI: Final[float] = 1.0 / math.sqrt(2.0 * math.pi)


def normal_cdf(x: npt.ArrayLike) -> FloatArray:
    """Standard normal CDF (``scipy.special.ndtr``, accurate far into both tails)."""
    return np.asarray(special.ndtr(np.asarray(x, dtype=np.float64)), dtype=np.float64)


def normal_pdf(x: npt.ArrayLike) -> FloatArray:
    z = np.asarray(x, dtype=np.float64)
    return np.exp(-0.5 * z * z) * _INV_SQRT_2PI


def normal_interval_mass(lo: FloatArray, hi: FloatArray) -> FloatArray:
    """Mass of the standard normal on ``[lo, hi]`` computed on the tail that avoids cancellation."""
    upper = np.asarray(special.ndtr(hi) - special.ndtr(lo), dtype=np.float64)
    # Mirror intervals in the right tail so both CDF values are small.
    mirrored = np.asarray(special.ndtr(-lo) - special.ndtr(-hi), dtype=np.float64)
    return np.where(lo > 0.0, mirrored, upper)


@dataclass(frozen=True)
class TruncatedNormal:
    """Normal(mean, sd^2) restricted to ``[lo, hi]`` and renormalized by its mass.

    ``mean`` may be an array to describe one distribution per row (state-dependent
    behavior means); ``sd``, ``lo`` and ``hi`` are shared.
    """

    mean: FloatArray | float
    sd: float
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.sd > 0.0:
            raise InvalidInputError(f"Truncated normal needs sd > 0, got {self.sd}")
        if not self.lo < self.hi:
            raise InvalidInputError(f"Truncated normal needs lo < hi, got [{self.lo}, {self.hi}]")
        if np.any(self.mass() <= _MIN_MASS):
            raise DegenerateTruncationError(
                f"Truncation interval [{self.lo}, {self.hi}] carries no normal mass"
            )

    def _standardized_bounds(self) -> tuple[FloatArray, FloatArray]:
        mean = np.asarray(self.mean, dtype=np.float64)
        return (self.lo - mean) / self.sd, (self.hi - mean) / self.sd

    def mass(self) -> FloatArray:
        """Normal probability of the truncation interval."""
        alpha, beta = self._standardized_bounds()
        return normal_interval_mass(alpha, beta)

    def density(self, x: npt.ArrayLike) -> FloatArray:
        """Truncated density; zero outside ``[lo, hi]``."""
        values = np.asarray(x, dtype=np.float64)
        mean = np.asarray(self.mean, dtype=np.float64)
        inside = (values >= self.lo) & (values <= self.hi)
        raw = normal_pdf((values - mean) / self.sd) / (self.sd * self.mass())
        return np.where(inside, raw, 0.0)

    def interval_mass(self, a: npt.ArrayLike, b: npt.ArrayLike) -> FloatArray:
        """Truncated-distribution probability of ``[a, b]`` (clipped to the support)."""
        lo = np.maximum(np.asarray(a, dtype=np.float64), self.lo)
        hi = np.minimum(np.asarray(b, dtype=np.float64), self.hi)
        mean = np.asarray(self.mean, dtype=np.float64)
        inner = normal_interval_mass((lo - mean) / self.sd, (hi - mean) / self.sd)
        return np.where(hi > lo, inner / self.mass(), 0.0)

    def sample(self, rng: np.random.Generator, size: int | None = None) -> FloatArray:
        """Draw by inverse CDF on the truncated interval.

        With an array ``mean`` one draw per row is returned and ``size`` is ignored.
        """
        alpha, beta = self._standardized_bounds()
        shape = alpha.shape if alpha.ndim > 0 else (() if size is None else (size,))
        cdf_lo = special.ndtr(alpha)
        cdf_hi = special.ndtr(beta)
        u = rng.uniform(size=shape)
        z = special.ndtri(cdf_lo + u * (cdf_hi - cdf_lo))
        draws = np.asarray(self.mean, dtype=np.float64) + self.sd * np.asarray(z)
        return np.clip(draws, self.lo, self.hi)


def truncated_normal(mean: float, sd: float, lo: float, hi: float) -> TruncatedNormal:
    """Build a truncated normal handle exposing ``sample(rng)`` and ``density(x)``."""
    return TruncatedNormal(mean=mean, sd=sd, lo=lo, hi=hi)
