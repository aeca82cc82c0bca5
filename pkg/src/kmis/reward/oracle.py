"""Exact reward oracles that stand in for a fitted regressor.

Dependencies: numerics.types
Wired in: domains/synthetic.py → oracle_model(), tests
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from kmis.numerics.types import FloatArray

MeanFunction = Callable[[FloatArray, FloatArray], FloatArray]


@dataclass(frozen=True)
class OracleRewardModel:
    """Known conditional mean with homoscedastic Gaussian noise."""

    action_dim: int
    mean_fn: MeanFunction
    noise_sd: float = 0.0

    def predict_mean_batch(self, states: FloatArray, actions: FloatArray) -> FloatArray:
        states = np.atleast_2d(np.asarray(states, dtype=np.float64))
        actions = np.atleast_2d(np.asarray(actions, dtype=np.float64))
        return np.asarray(self.mean_fn(states, actions), dtype=np.float64).reshape(-1)

    def predict_second_moment_batch(self, states: FloatArray, actions: FloatArray) -> FloatArray:
        mean = self.predict_mean_batch(states, actions)
        return mean * mean + self.noise_sd**2


def constant_oracle(value: float, action_dim: int, noise_sd: float = 0.0) -> OracleRewardModel:
    """Oracle whose mean is ``value`` everywhere (zero Hessian)."""

    def _mean(states: FloatArray, actions: FloatArray) -> FloatArray:
        return np.full(np.atleast_2d(states).shape[0], value)

    return OracleRewardModel(action_dim=action_dim, mean_fn=_mean, noise_sd=noise_sd)
