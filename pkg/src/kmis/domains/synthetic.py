"""Synthetic domains with closed-form target values.

* quadratic: ``r = -(s - a)^T Q (s - a) + N(0, noise_sd^2)`` with
  ``Q = [[11, 9], [9, 11]]``, Gaussian behavior around ``s + 0.2``, ``pi(s) = s``.
* abs_error: ``r = -|0.5 s_1 - a_1|`` with uniform behavior and optional dummy
  action dimensions, ``pi(s) = (0.5 s, 0, ..., 0)``.
* multimodal: ``r = -max(f_1, ..., f_4)`` of four Gaussian bumps in ``s - a``,
  uniform behavior, ``pi(s) = s + (0.5, 0)``.

States are uniform on ``[-1, 1]^2`` everywhere.

Dependencies: policies, reward.oracle, domains.base
Wired in: domains/registry.py, harness/runner.py, tests
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from functools import partial
from typing import Final

import numpy as np

from kmis.domains.base import Domain
from kmis.errors import InvalidInputError
from kmis.numerics.types import FloatArray
from kmis.policies.behavior import BehaviorPolicy, IsotropicGaussianBehavior, UniformBoxBehavior
from kmis.policies.dataset import LoggedDataset, generate_dataset
from kmis.policies.target import TargetPolicy
from kmis.reward.oracle import OracleRewardModel

QUADRATIC_FORM: Final[tuple[tuple[float, float], tuple[float, float]]] = ((11.0, 9.0), (9.0, 11.0))
STATE_DIM: Final[int] = 2
BEHAVIOR_SHIFT: Final[float] = 0.2
BEHAVIOR_SD: Final[float] = 0.5
QUADRATIC_CLIP_FLOOR: Final[float] = 0.1

RewardMean = Callable[[FloatArray, FloatArray], FloatArray]


@dataclass(frozen=True, eq=False)
class SyntheticDomain(Domain):
    """Uniform states on ``[-1, 1]^state_dim`` with a known conditional reward."""

    name: str
    state_dim: int
    behavior: BehaviorPolicy
    target: TargetPolicy
    reward_mean: RewardMean
    noise_sd: float
    closed_form_value: float

    @property
    def true_value(self) -> float:
        return self.closed_form_value

    def sample_states(self, rng: np.random.Generator, n: int) -> FloatArray:
        return rng.uniform(-1.0, 1.0, size=(n, self.state_dim))

    def mean_reward(self, states: FloatArray, actions: FloatArray) -> FloatArray:
        return np.asarray(self.reward_mean(np.atleast_2d(states), np.atleast_2d(actions)))

    def sample_rewards(
        self, states: FloatArray, actions: FloatArray, rng: np.random.Generator
    ) -> FloatArray:
        mean = self.mean_reward(states, actions)
        if self.noise_sd == 0.0:
            return mean
        return mean + self.noise_sd * rng.standard_normal(mean.shape[0])

    def generate(self, n: int, seed: int) -> LoggedDataset:
        return generate_dataset(self, self.behavior, n, seed)

    def oracle_model(self) -> OracleRewardModel:
        """Exact reward regressor for this domain."""
        return OracleRewardModel(
            action_dim=self.action_dim, mean_fn=self.mean_reward, noise_sd=self.noise_sd
        )


# ---------------------------------------------------------------------------
# Quadratic reward
# ---------------------------------------------------------------------------


def quadratic_reward(states: FloatArray, actions: FloatArray) -> FloatArray:
    diff = states - actions
    return -np.einsum("ni,ij,nj->n", diff, np.asarray(QUADRATIC_FORM), diff)


def _shifted(states: FloatArray, shift: float) -> FloatArray:
    return states + shift


def _identity(states: FloatArray) -> FloatArray:
    return np.array(states, dtype=np.float64, copy=True)


def make_quadratic(noise_sd: float = 0.5) -> SyntheticDomain:
    if noise_sd < 0.0:
        raise InvalidInputError(f"noise_sd must be >= 0, got {noise_sd}")
    return SyntheticDomain(
        name="quadratic",
        state_dim=STATE_DIM,
        behavior=IsotropicGaussianBehavior(
            action_dim=2,
            mean_map=partial(_shifted, shift=BEHAVIOR_SHIFT),
            sd=BEHAVIOR_SD,
            clip_floor=QUADRATIC_CLIP_FLOOR,
        ),
        target=TargetPolicy(name="identity", action_dim=2, action_map=_identity),
        reward_mean=quadratic_reward,
        noise_sd=noise_sd,
        closed_form_value=0.0,
    )


# ---------------------------------------------------------------------------
# Absolute error
# ---------------------------------------------------------------------------


def abs_error_reward(states: FloatArray, actions: FloatArray) -> FloatArray:
    return -np.abs(0.5 * states[:, 0] - actions[:, 0])


def _half_state_with_dummies(states: FloatArray, extra: int) -> FloatArray:
    return np.column_stack([0.5 * states, np.zeros((states.shape[0], extra))])


def make_abs_error(extra_dummy_dims: int = 0) -> SyntheticDomain:
    """Absolute-error domain with ``2 + extra_dummy_dims`` action dimensions."""
    if extra_dummy_dims < 0:
        raise InvalidInputError(f"extra_dummy_dims must be >= 0, got {extra_dummy_dims}")
    action_dim = STATE_DIM + extra_dummy_dims
    return SyntheticDomain(
        name="abs_error",
        state_dim=STATE_DIM,
        behavior=UniformBoxBehavior(lo=(-1.0,) * action_dim, hi=(1.0,) * action_dim),
        target=TargetPolicy(
            name="half_state",
            action_dim=action_dim,
            action_map=partial(_half_state_with_dummies, extra=extra_dummy_dims),
        ),
        reward_mean=abs_error_reward,
        noise_sd=0.0,
        closed_form_value=0.0,
    )


# ---------------------------------------------------------------------------
# Multimodal
# ---------------------------------------------------------------------------

_BUMPS: Final[tuple[tuple[float, float, float, float], ...]] = (
    # (centre_1, scale_1, centre_2, scale_2) in s - a coordinates
    (0.5, 0.25, 0.0, 1.0),
    (-0.5, 0.25, 0.0, 1.0),
    (0.0, 1.0, -0.5, 0.25),
    (0.0, 1.0, 0.5, 0.25),
)


def multimodal_reward(states: FloatArray, actions: FloatArray) -> FloatArray:
    diff = states - actions
    bumps = [
        np.exp(-(((diff[:, 0] - c1) / w1) ** 2 + ((diff[:, 1] - c2) / w2) ** 2))
        for c1, w1, c2, w2 in _BUMPS
    ]
    return -np.max(np.stack(bumps, axis=1), axis=1)


def _offset_first(states: FloatArray) -> FloatArray:
    return states + np.array([0.5, 0.0])


def make_multimodal() -> SyntheticDomain:
    return SyntheticDomain(
        name="multimodal",
        state_dim=STATE_DIM,
        behavior=UniformBoxBehavior(lo=(-1.0, -1.0), hi=(1.0, 1.0)),
        target=TargetPolicy(name="offset", action_dim=2, action_map=_offset_first),
        reward_mean=multimodal_reward,
        noise_sd=0.0,
        closed_form_value=-1.0,
    )


# ---------------------------------------------------------------------------
# Monte Carlo oracle
# ---------------------------------------------------------------------------


def monte_carlo_value(domain: SyntheticDomain, n_states: int, seed: int) -> tuple[float, float]:
    """Monte Carlo mean of ``E[r | s, pi(s)]`` over sampled states and its standard error."""
    if n_states < 1:
        raise InvalidInputError(f"n_states must be >= 1, got {n_states}")
    states = domain.sample_states(np.random.default_rng(seed), n_states)
    values = domain.mean_reward(states, domain.target.act(states))
    if n_states == 1:
        return float(values[0]), 0.0
    return float(np.mean(values)), float(np.std(values, ddof=1)) / math.sqrt(n_states)


def true_value_mc(domain: SyntheticDomain, n_states: int, seed: int) -> float:
    return monte_carlo_value(domain, n_states, seed)[0]
