"""Logged bandit datasets: validation, CSV round-trip, and seeded generation.

CSV layout::

    s_1,...,s_Ds,a_1,...,a_Da,r,pb

Floats are written with Python's shortest round-trip repr and read back with
``float_precision="round_trip"`` so a save/load cycle is exact.

Dependencies: errors, policies.behavior
Wired in: domains/*, reward/*, estimators/*, harness/runner.py, cli.py
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np
import pandas as pd

from kmis.errors import InvalidInputError, SchemaError
from kmis.numerics.types import FloatArray, IntArray
from kmis.policies.behavior import BehaviorPolicy

_log = logging.getLogger(__name__)

_STATE_COLUMN = re.compile(r"^s_(\d+)$")
_ACTION_COLUMN = re.compile(r"^a_(\d+)$")


def _frozen(values: FloatArray) -> FloatArray:
    array = np.array(values, dtype=np.float64, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class LoggedDataset:
    """N logged (state, action, reward) records plus cached clipped behavior densities."""

    states: FloatArray
    actions: FloatArray
    rewards: FloatArray
    behavior_density: FloatArray

    def __post_init__(self) -> None:
        states = _frozen(np.atleast_2d(self.states))
        actions = _frozen(np.atleast_2d(self.actions))
        rewards = _frozen(np.ravel(self.rewards))
        density = _frozen(np.ravel(self.behavior_density))
        n = states.shape[0]
        if n < 1:
            raise InvalidInputError("A logged dataset needs at least one record")
        if actions.shape[0] != n or rewards.shape[0] != n or density.shape[0] != n:
            raise InvalidInputError(
                f"Row counts disagree: states={n}, actions={actions.shape[0]}, "
                f"rewards={rewards.shape[0]}, densities={density.shape[0]}"
            )
        for label, block in (("states", states), ("actions", actions), ("rewards", rewards)):
            if not np.all(np.isfinite(block)):
                raise InvalidInputError(f"Logged {label} must be finite")
        if not np.all(np.isfinite(density)) or np.any(density <= 0.0):
            raise InvalidInputError("Cached behavior densities must be finite and positive")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "rewards", rewards)
        object.__setattr__(self, "behavior_density", density)

    @property
    def n(self) -> int:
        return int(self.states.shape[0])

    @property
    def state_dim(self) -> int:
        return int(self.states.shape[1])

    @property
    def action_dim(self) -> int:
        return int(self.actions.shape[1])

    def take(self, indices: IntArray) -> LoggedDataset:
        """Return the rows at ``indices`` (used for permutations and subsamples)."""
        return LoggedDataset(
            states=self.states[indices],
            actions=self.actions[indices],
            rewards=self.rewards[indices],
            behavior_density=self.behavior_density[indices],
        )


class DatasetSource(Protocol):
    """What ``generate_dataset`` needs from a domain."""

    def sample_states(self, rng: np.random.Generator, n: int) -> FloatArray: ...

    def sample_rewards(
        self, states: FloatArray, actions: FloatArray, rng: np.random.Generator
    ) -> FloatArray: ...


def generate_dataset(
    domain: DatasetSource, behavior: BehaviorPolicy, n: int, seed: int
) -> LoggedDataset:
    """Draw ``n`` logged records; identical seeds give identical datasets."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    states = domain.sample_states(rng, n)
    actions = behavior.sample(states, rng)
    rewards = domain.sample_rewards(states, actions, rng)
    return LoggedDataset(
        states=states,
        actions=actions,
        rewards=rewards,
        behavior_density=behavior.density(states, actions),
    )


def dataset_columns(state_dim: int, action_dim: int) -> list[str]:
    states = [f"s_{i}" for i in range(1, state_dim + 1)]
    actions = [f"a_{i}" for i in range(1, action_dim + 1)]
    return [*states, *actions, "r", "pb"]


def save_dataset_csv(data: LoggedDataset, path: Path) -> Path:
    """Write ``data`` with the documented header; returns ``path``."""
    table = np.column_stack([data.states, data.actions, data.rewards, data.behavior_density])
    frame = pd.DataFrame(table, columns=dataset_columns(data.state_dim, data.action_dim))
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
    _log.info("Wrote %d logged records to %s", data.n, path)
    return path


def _indexed_columns(columns: list[str], pattern: re.Pattern[str]) -> list[str]:
    found = [(int(m.group(1)), c) for c in columns if (m := pattern.match(c))]
    return [c for _, c in sorted(found)]


def load_dataset_csv(path: Path) -> LoggedDataset:
    """Load a dataset written by :func:`save_dataset_csv`."""
    frame = pd.read_csv(path, float_precision="round_trip")
    columns = [str(c) for c in frame.columns]
    state_cols = _indexed_columns(columns, _STATE_COLUMN)
    action_cols = _indexed_columns(columns, _ACTION_COLUMN)
    if not state_cols:
        raise SchemaError("s_1", str(path))
    if not action_cols:
        raise SchemaError("a_1", str(path))
    for required in ("r", "pb"):
        if required not in columns:
            raise SchemaError(required, str(path))
    return LoggedDataset(
        states=frame[state_cols].to_numpy(dtype=np.float64),
        actions=frame[action_cols].to_numpy(dtype=np.float64),
        rewards=frame["r"].to_numpy(dtype=np.float64),
        behavior_density=frame["pb"].to_numpy(dtype=np.float64),
    )
