"""Shared test fixtures for kmis."""

from __future__ import annotations

from collections.abc import Callable

import numpy as np
import pytest

from kmis.domains.synthetic import SyntheticDomain, make_abs_error, make_quadratic
from kmis.policies.dataset import LoggedDataset
from kmis.reward.config import RewardModelConfig


def pytest_configure(config: pytest.Config) -> None:
    """Register custom markers so pytest doesn't warn about unknown marks."""
    config.addinivalue_line(
        "markers",
        "slow: end-to-end reproductions that fit many reward models. "
        "Deselected by default; run with `pytest -m slow`.",
    )


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture()
def fast_reward_config() -> RewardModelConfig:
    """Small network and short schedule so fits finish in well under a second."""
    return RewardModelConfig(
        hidden_sizes=(16, 16),
        learning_rate=1e-2,
        dropout=0.0,
        patience=5,
        max_epochs=40,
        batch_size=64,
    )


@pytest.fixture()
def quadratic() -> SyntheticDomain:
    return make_quadratic()


@pytest.fixture()
def abs_error() -> SyntheticDomain:
    return make_abs_error()


@pytest.fixture()
def quadratic_data(quadratic: SyntheticDomain) -> LoggedDataset:
    return quadratic.generate(500, seed=7)


RecordFactory = Callable[[list[float], list[float], float, float], LoggedDataset]


@pytest.fixture()
def one_record() -> RecordFactory:
    """Build a one-row logged dataset from (state, action, reward, density)."""

    def _make(
        state: list[float], action: list[float], reward: float, density: float
    ) -> LoggedDataset:
        return LoggedDataset(
            states=np.array([state]),
            actions=np.array([action]),
            rewards=np.array([reward]),
            behavior_density=np.array([density]),
        )

    return _make
