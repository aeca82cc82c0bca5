"""Tests for policies: target maps, behavior densities and logged datasets."""

from __future__ import annotations

import itertools
import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from kmis.domains.synthetic import SyntheticDomain
from kmis.errors import InvalidInputError, SchemaError
from kmis.policies.behavior import (
    BehaviorPolicy,
    IsotropicGaussianBehavior,
    TruncatedNormalUniformBehavior,
    UniformBoxBehavior,
    density,
    density_bin_mass,
)
from kmis.policies.dataset import (
    LoggedDataset,
    dataset_columns,
    generate_dataset,
    load_dataset_csv,
    save_dataset_csv,
)
from kmis.policies.target import TargetPolicy


def _zero_mean(states: np.ndarray) -> np.ndarray:
    return np.zeros((states.shape[0], 2))


# ============================================================================
# Target policies
# ============================================================================


def test_target_act_shapes() -> None:
    policy = TargetPolicy("double", 2, lambda s: 2.0 * s)
    actions = policy.act(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert actions.tolist() == [[2.0, 4.0], [6.0, 8.0]]
    assert policy.act_one(np.array([0.5, 0.5])).tolist() == [1.0, 1.0]


def test_target_wrong_output_width_rejected() -> None:
    policy = TargetPolicy("bad", 3, lambda s: s)
    with pytest.raises(InvalidInputError, match="expected"):
        policy.act(np.zeros((4, 2)))


# ============================================================================
# Behavior densities
# ============================================================================


class TestBehaviorDensity:
    """Pointwise densities, clipping and bin masses."""

    def test_uniform_box_density(self) -> None:
        box = UniformBoxBehavior(lo=(-1.0, -1.0), hi=(1.0, 1.0))
        assert density(box, [0.0, 0.0], [0.3, -0.7]) == pytest.approx(0.25)
        assert box.volume == pytest.approx(4.0)

    def test_uniform_box_is_zero_outside_unless_clipped(self) -> None:
        box = UniformBoxBehavior(lo=(-1.0, -1.0), hi=(1.0, 1.0))
        assert density(box, [0.0, 0.0], [1.5, 0.0]) == 0.0
        clipped = UniformBoxBehavior(lo=(-1.0, -1.0), hi=(1.0, 1.0), clip_floor=0.05)
        assert density(clipped, [0.0, 0.0], [1.5, 0.0]) == pytest.approx(0.05)

    def test_gaussian_density_at_mean(self) -> None:
        gauss = IsotropicGaussianBehavior(action_dim=2, mean_map=_zero_mean, sd=0.5)
        assert density(gauss, [0.3, 0.3], [0.0, 0.0]) == pytest.approx(0.63662, abs=1e-5)

    def test_gaussian_clip_floor_applies_far_from_mean(self) -> None:
        gauss = IsotropicGaussianBehavior(
            action_dim=2, mean_map=_zero_mean, sd=0.5, clip_floor=0.1
        )
        assert density(gauss, [0.0, 0.0], [3.0, 3.0]) == pytest.approx(0.1)

    def test_gaussian_rejects_non_positive_sd(self) -> None:
        with pytest.raises(InvalidInputError):
            IsotropicGaussianBehavior(action_dim=2, mean_map=_zero_mean, sd=0.0)

    def test_wrong_action_width_rejected(self) -> None:
        box = UniformBoxBehavior(lo=(-1.0, -1.0), hi=(1.0, 1.0))
        with pytest.raises(InvalidInputError, match="columns"):
            box.density(np.zeros((1, 2)), np.zeros((1, 3)))

    def test_uniform_bin_mass(self) -> None:
        box = UniformBoxBehavior(lo=(-1.0, -1.0), hi=(1.0, 1.0))
        assert density_bin_mass(box, [0.0, 0.0], [(0.0, 0.2), (0.0, 0.2)]) == pytest.approx(0.01)

    def test_bin_mass_is_not_clipped(self) -> None:
        box = UniformBoxBehavior(lo=(-1.0, -1.0), hi=(1.0, 1.0), clip_floor=0.5)
        assert density_bin_mass(box, [0.0, 0.0], [(2.0, 3.0), (0.0, 0.2)]) == 0.0

    def test_gaussian_bin_mass_matches_normal_cdf(self) -> None:
        gauss = IsotropicGaussianBehavior(action_dim=2, mean_map=_zero_mean, sd=1.0)
        one_sided = 0.5 * (1.0 + math.erf(1.0 / math.sqrt(2.0))) - 0.5
        mass = density_bin_mass(gauss, [0.0, 0.0], [(0.0, 1.0), (0.0, 1.0)])
        assert mass == pytest.approx(one_sided**2)

    @pytest.mark.parametrize(
        "bounds",
        [
            [(0.0, 0.0), (0.0, 0.2)],
            [(0.0, float("inf")), (0.0, 0.2)],
            [(0.0, 0.2)],
        ],
    )
    def test_bad_bin_bounds_rejected(self, bounds: list[tuple[float, float]]) -> None:
        box = UniformBoxBehavior(lo=(-1.0, -1.0), hi=(1.0, 1.0))
        with pytest.raises(InvalidInputError):
            density_bin_mass(box, [0.0, 0.0], bounds)

    @pytest.mark.parametrize(
        ("behavior", "state", "lo", "hi"),
        [
            (UniformBoxBehavior(lo=(-1.0, -1.0), hi=(1.0, 1.0)), [0.0, 0.0], -1.0, 1.0),
            (
                TruncatedNormalUniformBehavior(
                    mean_map=lambda s: s[:, 0], sd=1.5, lo=1.0, hi=4.0
                ),
                [2.0],
                1.0,
                4.0,
            ),
            (
                IsotropicGaussianBehavior(action_dim=2, mean_map=_zero_mean, sd=1.0),
                [0.0, 0.0],
                -10.0,
                10.0,
            ),
        ],
    )
    def test_bin_masses_over_a_partition_sum_to_one(
        self, behavior: BehaviorPolicy, state: list[float], lo: float, hi: float
    ) -> None:
        edges = np.linspace(lo, hi, 5)
        intervals = [(float(a), float(b)) for a, b in itertools.pairwise(edges)]
        total = sum(
            density_bin_mass(behavior, state, [first, second])
            for first, second in itertools.product(intervals, repeat=2)
        )
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_truncated_normal_uniform_product(self) -> None:
        behavior = TruncatedNormalUniformBehavior(
            mean_map=lambda s: np.zeros(s.shape[0]), sd=1.0, lo=0.0, hi=10.0
        )
        # half-normal density at 0 is 2 * phi(0); the uniform factor is 1/10
        value = density(behavior, [0.0], [0.0, 5.0])
        assert value == pytest.approx(0.797885 / 10.0, rel=1e-5)

    def test_truncated_normal_uniform_samples_in_range(self, rng: np.random.Generator) -> None:
        behavior = TruncatedNormalUniformBehavior(
            mean_map=lambda s: s[:, 0], sd=2.0, lo=1.0, hi=4.0
        )
        actions = behavior.sample(rng.uniform(0.0, 5.0, size=(300, 1)), rng)
        assert actions.shape == (300, 2)
        assert np.all((actions >= 1.0) & (actions <= 4.0))


# ============================================================================
# Logged datasets
# ============================================================================


class TestLoggedDataset:
    """Validation, generation and CSV persistence."""

    def test_rejects_mismatched_rows(self) -> None:
        with pytest.raises(InvalidInputError, match="Row counts"):
            LoggedDataset(
                states=np.zeros((3, 2)),
                actions=np.zeros((2, 2)),
                rewards=np.zeros(3),
                behavior_density=np.ones(3),
            )

    def test_rejects_non_positive_density(self) -> None:
        with pytest.raises(InvalidInputError, match="positive"):
            LoggedDataset(
                states=np.zeros((2, 2)),
                actions=np.zeros((2, 2)),
                rewards=np.zeros(2),
                behavior_density=np.array([1.0, 0.0]),
            )

    def test_arrays_are_read_only(self, quadratic_data: LoggedDataset) -> None:
        with pytest.raises(ValueError):
            quadratic_data.rewards[0] = 1.0

    def test_generation_is_seed_stable(self, quadratic: SyntheticDomain) -> None:
        first = generate_dataset(quadratic, quadratic.behavior, 50, seed=3)
        second = generate_dataset(quadratic, quadratic.behavior, 50, seed=3)
        other = generate_dataset(quadratic, quadratic.behavior, 50, seed=4)
        np.testing.assert_array_equal(first.actions, second.actions)
        np.testing.assert_array_equal(first.rewards, second.rewards)
        assert not np.array_equal(first.actions, other.actions)

    def test_cached_density_is_clipped(self, quadratic_data: LoggedDataset) -> None:
        assert float(quadratic_data.behavior_density.min()) >= 0.1

    def test_take_selects_rows(self, quadratic_data: LoggedDataset) -> None:
        subset = quadratic_data.take(np.array([4, 0]))
        assert subset.n == 2
        np.testing.assert_array_equal(subset.states[1], quadratic_data.states[0])

    def test_csv_round_trip_is_exact(
        self, quadratic_data: LoggedDataset, tmp_path: Path
    ) -> None:
        path = save_dataset_csv(quadratic_data, tmp_path / "logged.csv")
        header = path.read_text(encoding="utf-8").splitlines()[0]
        assert header == "s_1,s_2,a_1,a_2,r,pb"
        loaded = load_dataset_csv(path)
        np.testing.assert_array_equal(loaded.states, quadratic_data.states)
        np.testing.assert_array_equal(loaded.actions, quadratic_data.actions)
        np.testing.assert_array_equal(loaded.rewards, quadratic_data.rewards)
        np.testing.assert_array_equal(loaded.behavior_density, quadratic_data.behavior_density)

    def test_load_orders_indexed_columns_numerically(self, tmp_path: Path) -> None:
        columns = dataset_columns(1, 11)
        frame = pd.DataFrame([np.arange(len(columns), dtype=float) + 1.0], columns=columns)
        path = tmp_path / "wide.csv"
        frame[list(reversed(columns))].to_csv(path, index=False)
        loaded = load_dataset_csv(path)
        assert loaded.action_dim == 11
        assert loaded.actions[0].tolist() == [float(i) for i in range(2, 13)]

    def test_load_missing_column_raises(self, tmp_path: Path) -> None:
        path = tmp_path / "broken.csv"
        path.write_text("s_1,a_1,r\n0.0,0.0,1.0\n", encoding="utf-8")
        with pytest.raises(SchemaError, match="pb"):
            load_dataset_csv(path)
