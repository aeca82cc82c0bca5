"""Known stochastic behavior policies with exact densities and bin masses.

Three closed-form families cover every domain: an isotropic Gaussian around a
state-dependent mean, a uniform box, and the Warfarin product of a truncated
normal (first action) and a uniform (second action). Pointwise densities are
clipped from below at ``clip_floor``; bin masses are never clipped.

Dependencies: errors, numerics.distributions
Wired in: policies/dataset.py, domains/*, estimators/*, bandwidth/*
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from kmis.errors import InvalidInputError
from kmis.numerics.distributions import TruncatedNormal, normal_interval_mass
from kmis.numerics.types import FloatArray

MeanMap = Callable[[FloatArray], FloatArray]


def _as_rows(values: npt.ArrayLike, width: int, label: str) -> FloatArray:
    rows = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if rows.shape[1] != width:
        raise InvalidInputError(f"{label} must have {width} columns, got {rows.shape[1]}")
    return rows


class BehaviorPolicy(ABC):
    """Density-evaluable sampler ``pi_b(a | s)``."""

    action_dim: int
    clip_floor: float

    @abstractmethod
    def raw_density(self, states: FloatArray, actions: FloatArray) -> FloatArray:
        """Unclipped density at each (state, action) row."""

    @abstractmethod
    def bin_mass(self, states: FloatArray, lows: FloatArray, highs: FloatArray) -> FloatArray:
        """Probability that the action falls in the box ``[lows, highs]`` per row."""

    @abstractmethod
    def sample(self, states: FloatArray, rng: np.random.Generator) -> FloatArray:
        """Draw one action per state row."""

    def density(self, states: FloatArray, actions: FloatArray) -> FloatArray:
        """Clipped density ``max(raw, clip_floor)`` per row."""
        actions = _as_rows(actions, self.action_dim, "actions")
        return np.maximum(self.raw_density(np.atleast_2d(states), actions), self.clip_floor)


@dataclass(frozen=True)
class IsotropicGaussianBehavior(BehaviorPolicy):
    """``N(mean(s), sd^2 I)`` over the action space."""

    action_dim: int
    mean_map: MeanMap
    sd: float
    clip_floor: float = 0.0

    def __post_init__(self) -> None:
        if not self.sd > 0.0:
            raise InvalidInputError(f"Gaussian behavior needs sd > 0, got {self.sd}")

    def _means(self, states: FloatArray) -> FloatArray:
        return _as_rows(self.mean_map(np.atleast_2d(states)), self.action_dim, "behavior mean")

    def raw_density(self, states: FloatArray, actions: FloatArray) -> FloatArray:
        z = (actions - self._means(states)) / self.sd
        norm = (2.0 * math.pi * self.sd * self.sd) ** (-0.5 * self.action_dim)
        return norm * np.exp(-0.5 * np.einsum("ij,ij->i", z, z))

    def bin_mass(self, states: FloatArray, lows: FloatArray, highs: FloatArray) -> FloatArray:
        means = self._means(states)
        per_dim = normal_interval_mass((lows - means) / self.sd, (highs - means) / self.sd)
        return np.prod(per_dim, axis=1)

    def sample(self, states: FloatArray, rng: np.random.Generator) -> FloatArray:
        means = self._means(states)
        return means + self.sd * rng.standard_normal(means.shape)


@dataclass(frozen=True)
class UniformBoxBehavior(BehaviorPolicy):
    """Uniform over ``[lo_k, hi_k]`` per action dimension, independent of the state."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    clip_floor: float = 0.0

    def __post_init__(self) -> None:
        if len(self.lo) != len(self.hi) or not self.lo:
            raise InvalidInputError("Uniform box needs matching, nonempty lo/hi bounds")
        if any(h <= lo for lo, h in zip(self.lo, self.hi, strict=True)):
            raise InvalidInputError("Uniform box needs lo < hi in every dimension")

    @property
    def action_dim(self) -> int:  # type: ignore[override]
        return len(self.lo)

    @property
    def volume(self) -> float:
        return math.prod(h - lo for lo, h in zip(self.lo, self.hi, strict=True))

    def raw_density(self, states: FloatArray, actions: FloatArray) -> FloatArray:
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        inside = np.all((actions >= lo) & (actions <= hi), axis=1)
        return np.where(inside, 1.0 / self.volume, 0.0)

    def bin_mass(self, states: FloatArray, lows: FloatArray, highs: FloatArray) -> FloatArray:
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        overlap = np.clip(np.minimum(highs, hi) - np.maximum(lows, lo), 0.0, None)
        return np.prod(overlap / (hi - lo), axis=1)

    def sample(self, states: FloatArray, rng: np.random.Generator) -> FloatArray:
        n = np.atleast_2d(states).shape[0]
        return rng.uniform(np.asarray(self.lo), np.asarray(self.hi), size=(n, self.action_dim))


@dataclass(frozen=True)
class TruncatedNormalUniformBehavior(BehaviorPolicy):
    """Product of a truncated normal on action 1 and a uniform on action 2.

    Action 1 follows ``N(mean(s), sd^2)`` truncated to ``[lo, hi]``; action 2 is
    uniform on the same interval.
    """

    mean_map: Callable[[FloatArray], FloatArray]
    sd: float
    lo: float
    hi: float
    clip_floor: float = 0.0
    action_dim: int = 2

    def _first(self, states: FloatArray) -> TruncatedNormal:
        means = np.asarray(self.mean_map(np.atleast_2d(states)), dtype=np.float64).reshape(-1)
        return TruncatedNormal(mean=means, sd=self.sd, lo=self.lo, hi=self.hi)

    def _uniform(self) -> UniformBoxBehavior:
        return UniformBoxBehavior(lo=(self.lo,), hi=(self.hi,))

    def raw_density(self, states: FloatArray, actions: FloatArray) -> FloatArray:
        first = self._first(states).density(actions[:, 0])
        second = self._uniform().raw_density(states, actions[:, 1:2])
        return first * second

    def bin_mass(self, states: FloatArray, lows: FloatArray, highs: FloatArray) -> FloatArray:
        first = self._first(states).interval_mass(lows[:, 0], highs[:, 0])
        second = self._uniform().bin_mass(states, lows[:, 1:2], highs[:, 1:2])
        return first * second

    def sample(self, states: FloatArray, rng: np.random.Generator) -> FloatArray:
        first = self._first(states).sample(rng)
        second = self._uniform().sample(states, rng)[:, 0]
        return np.column_stack([first, second])


def density(policy: BehaviorPolicy, s: npt.ArrayLike, a: npt.ArrayLike) -> float:
    """Clipped behavior density ``max(pi_b(a|s), clip_floor)`` at one point."""
    action = _as_rows(a, policy.action_dim, "action")
    return float(policy.density(np.atleast_2d(np.asarray(s, dtype=np.float64)), action)[0])


def density_bin_mass(
    policy: BehaviorPolicy, s: npt.ArrayLike, bin_bounds: list[tuple[float, float]]
) -> float:
    """Exact behavior probability of a per-dimension interval box (no clipping)."""
    if len(bin_bounds) != policy.action_dim:
        raise InvalidInputError(
            f"Bin has {len(bin_bounds)} intervals, policy has {policy.action_dim} action dims"
        )
    lows = np.array([[lo for lo, _ in bin_bounds]], dtype=np.float64)
    highs = np.array([[hi for _, hi in bin_bounds]], dtype=np.float64)
    if not (np.all(np.isfinite(lows)) and np.all(np.isfinite(highs))):
        raise InvalidInputError("Bin intervals must be finite")
    if np.any(highs <= lows):
        raise InvalidInputError(f"Empty bin interval in {bin_bounds}")
    state = np.atleast_2d(np.asarray(s, dtype=np.float64))
    return float(policy.bin_mass(state, lows, highs)[0])
