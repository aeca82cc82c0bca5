"""Tests for the reward regressor: network, training, persistence, selection, Hessians."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from kmis.domains.synthetic import SyntheticDomain, make_quadratic
from kmis.errors import InvalidInputError, ModelStateError, NumericalError
from kmis.policies.dataset import LoggedDataset
from kmis.policies.target import TargetPolicy
from kmis.reward.config import (
    RewardModelConfig,
    synthetic_reward_config,
    warfarin_reward_config,
)
from kmis.reward.direct import dm_estimate
from kmis.reward.hessian import hessian_at, hessian_batch, mean_action_gradient
from kmis.reward.model import (
    RewardModel,
    fit,
    load_reward_model,
    predict_mean,
    predict_second_moment,
    save_reward_model,
)
from kmis.reward.network import GaussianMLP, gaussian_nll, nll_gradients
from kmis.reward.oracle import OracleRewardModel, constant_oracle
from kmis.reward.selection import grid_search

_Q = np.array([[11.0, 9.0], [9.0, 11.0]])


def _with_rewards(data: LoggedDataset, rewards: np.ndarray) -> LoggedDataset:
    return LoggedDataset(
        states=data.states,
        actions=data.actions,
        rewards=rewards,
        behavior_density=data.behavior_density,
    )


# ============================================================================
# Configuration
# ============================================================================


class TestRewardModelConfig:
    """Validation, overrides and presets."""

    def test_defaults(self) -> None:
        config = RewardModelConfig()
        assert config.hidden_sizes == (128, 128)
        assert config.learning_rate == pytest.approx(5e-4)
        assert config.patience == 20

    @pytest.mark.parametrize(
        "field",
        [
            {"dropout": 1.0},
            {"learning_rate": 0.0},
            {"l2": -1.0},
            {"hidden_sizes": ()},
            {"validation_fraction": 1.0},
        ],
    )
    def test_invalid_values_rejected(self, field: dict[str, object]) -> None:
        with pytest.raises(InvalidInputError):
            RewardModelConfig(**field)  # type: ignore[arg-type]

    def test_overrides_skip_none(self) -> None:
        config = RewardModelConfig().with_overrides(l2=0.1, dropout=None)
        assert config.l2 == pytest.approx(0.1)
        assert config.dropout == pytest.approx(0.5)

    def test_dict_round_trip(self) -> None:
        config = RewardModelConfig(hidden_sizes=(8, 4), l2=1e-3)
        assert RewardModelConfig.from_dict(config.to_dict()) == config

    def test_presets(self) -> None:
        assert synthetic_reward_config().dropout == pytest.approx(0.5)
        assert synthetic_reward_config().l2 == 0.0
        assert warfarin_reward_config().dropout == 0.0
        assert warfarin_reward_config().l2 == pytest.approx(0.1)


# ============================================================================
# Network and backpropagation
# ============================================================================


def _loss(net: GaussianMLP, x: np.ndarray, y: np.ndarray) -> float:
    mean, logvar, _ = net.forward(x)
    return float(np.mean(gaussian_nll(y, mean, logvar)))


def test_network_gradient_check(rng: np.random.Generator) -> None:
    net = GaussianMLP.initialize(3, (6, 5), rng)
    x = rng.standard_normal((12, 3))
    y = rng.standard_normal(12)
    mean, logvar, cache = net.forward(x)
    grad_mean, grad_logvar = nll_gradients(y, mean, logvar)
    grads, _ = net.backward(cache, grad_mean, grad_logvar)

    step = 1e-6
    for index, param in enumerate(net.params):
        flat = param.reshape(-1)
        for k in range(0, flat.shape[0], max(1, flat.shape[0] // 4)):
            original = flat[k]
            flat[k] = original + step
            up = _loss(net, x, y)
            flat[k] = original - step
            down = _loss(net, x, y)
            flat[k] = original
            numeric = (up - down) / (2.0 * step)
            analytic = grads[index].reshape(-1)[k]
            assert analytic == pytest.approx(numeric, rel=1e-4, abs=1e-8)


def test_network_input_gradient(rng: np.random.Generator) -> None:
    net = GaussianMLP.initialize(4, (7,), rng)
    x = rng.standard_normal((5, 4))
    _, _, cache = net.forward(x)
    _, input_grad = net.backward(cache, np.ones(5), np.zeros(5))
    step = 1e-6
    for j in range(4):
        shift = np.zeros(4)
        shift[j] = step
        up, _, _ = net.forward(x + shift)
        down, _, _ = net.forward(x - shift)
        numeric = (up - down) / (2.0 * step)
        np.testing.assert_allclose(input_grad[:, j], numeric, rtol=1e-4, atol=1e-8)


def test_dropout_only_with_rng(rng: np.random.Generator) -> None:
    net = GaussianMLP.initialize(2, (32,), rng)
    x = rng.standard_normal((4, 2))
    plain, _, _ = net.forward(x, dropout=0.5)
    again, _, _ = net.forward(x, dropout=0.5)
    np.testing.assert_array_equal(plain, again)
    dropped, _, _ = net.forward(x, dropout=0.5, rng=np.random.default_rng(0))
    assert not np.allclose(plain, dropped)


# ============================================================================
# Training
# ============================================================================


class TestFit:
    """Mini-batch training with early stopping."""

    def test_constant_reward_is_learned(self, quadratic_data: LoggedDataset) -> None:
        data = _with_rewards(quadratic_data.take(np.arange(200)), np.full(200, 3.0))
        config = RewardModelConfig(
            hidden_sizes=(16, 16), learning_rate=5e-3, dropout=0.0, patience=30, max_epochs=300
        )
        model, _ = fit(data, config, seed=0)
        predicted = model.predict_mean_batch(data.states, data.actions)
        assert np.max(np.abs(predicted - 3.0)) <= 0.05

    def test_report_describes_the_run(
        self, quadratic_data: LoggedDataset, fast_reward_config: RewardModelConfig
    ) -> None:
        _, report = fit(quadratic_data, fast_reward_config, seed=1)
        assert report.n_train + report.n_validation == quadratic_data.n
        assert report.n_validation == 100
        assert 1 <= report.epochs_run <= fast_reward_config.max_epochs
        assert report.best_validation_nll <= report.initial_validation_nll
        assert len(report.validation_history) == report.epochs_run + 1
        assert report.best_validation_nll == min(report.validation_history)

    def test_same_seed_same_model(
        self, quadratic_data: LoggedDataset, fast_reward_config: RewardModelConfig
    ) -> None:
        first, _ = fit(quadratic_data, fast_reward_config, seed=5)
        second, _ = fit(quadratic_data, fast_reward_config, seed=5)
        held_out = quadratic_data.states[:10], quadratic_data.actions[:10]
        np.testing.assert_array_equal(
            first.predict_mean_batch(*held_out), second.predict_mean_batch(*held_out)
        )

    def test_second_moment_exceeds_squared_mean(
        self, quadratic_data: LoggedDataset, fast_reward_config: RewardModelConfig
    ) -> None:
        model, _ = fit(quadratic_data, fast_reward_config, seed=2)
        s, a = quadratic_data.states[0], quadratic_data.actions[0]
        assert predict_second_moment(model, s, a) > predict_mean(model, s, a) ** 2

    def test_too_few_records_rejected(self, quadratic_data: LoggedDataset) -> None:
        with pytest.raises(InvalidInputError, match="N >= 10"):
            fit(quadratic_data.take(np.arange(9)))

    def test_unfitted_model_raises(self) -> None:
        model = RewardModel()
        assert not model.fitted
        with pytest.raises(ModelStateError):
            model.predict_mean_batch(np.zeros((1, 2)), np.zeros((1, 2)))

    def test_wrong_input_width_rejected(
        self, quadratic_data: LoggedDataset, fast_reward_config: RewardModelConfig
    ) -> None:
        model, _ = fit(quadratic_data, fast_reward_config, seed=0)
        with pytest.raises(InvalidInputError, match="widths"):
            model.predict_mean_batch(np.zeros((1, 3)), np.zeros((1, 2)))


def test_saved_model_predicts_identically(
    quadratic_data: LoggedDataset, fast_reward_config: RewardModelConfig, tmp_path: Path
) -> None:
    model, _ = fit(quadratic_data, fast_reward_config, seed=0)
    path = save_reward_model(model, tmp_path / "models" / "reward.json")
    loaded = load_reward_model(path)
    assert loaded.config == model.config
    held_out = quadratic_data.states[:25], quadratic_data.actions[:25]
    np.testing.assert_array_equal(
        loaded.predict_mean_batch(*held_out), model.predict_mean_batch(*held_out)
    )
    np.testing.assert_array_equal(
        loaded.predict_second_moment_batch(*held_out), model.predict_second_moment_batch(*held_out)
    )


def test_grid_search_keeps_lowest_validation_nll(
    quadratic_data: LoggedDataset, fast_reward_config: RewardModelConfig
) -> None:
    result = grid_search(quadratic_data, "l2", [1e-4, 1e-1], fast_reward_config, seed=0)
    assert result.parameter == "l2"
    assert [value for value, _ in result.candidates] == [1e-4, 1e-1]
    best = min(report.best_validation_nll for _, report in result.candidates)
    assert result.report.best_validation_nll == best
    assert result.model.config.l2 == pytest.approx(result.chosen)


def test_grid_search_rejects_empty_grid(quadratic_data: LoggedDataset) -> None:
    with pytest.raises(InvalidInputError, match="Empty"):
        grid_search(quadratic_data, "learning_rate", [])


# ============================================================================
# Hessians and gradients
# ============================================================================


class TestHessian:
    """Finite-difference Hessians of the predicted mean."""

    def test_quadratic_oracle_gives_minus_two_q(self, rng: np.random.Generator) -> None:
        oracle = make_quadratic().oracle_model()
        states = rng.uniform(-1.0, 1.0, size=(20, 2))
        actions = rng.uniform(-2.0, 2.0, size=(20, 2))
        hessians = hessian_batch(oracle, states, actions)
        assert hessians.shape == (20, 2, 2)
        assert np.max(np.abs(hessians + 2.0 * _Q)) <= 1e-4

    def test_constant_oracle_gives_zero(self) -> None:
        hessian = hessian_at(constant_oracle(2.5, 3), [0.1, 0.2], [0.3, -0.4, 5.0])
        assert np.max(np.abs(hessian.entries)) <= 1e-6

    def test_wrong_action_dim_rejected(self) -> None:
        with pytest.raises(InvalidInputError, match="dims"):
            hessian_batch(constant_oracle(0.0, 2), np.zeros((1, 2)), np.zeros((1, 3)))

    def test_non_finite_prediction_reports_indices(self) -> None:
        def _blows_up(states: np.ndarray, actions: np.ndarray) -> np.ndarray:
            return np.where(actions[:, 0] > 0.5, np.inf, 0.0)

        oracle = OracleRewardModel(action_dim=1, mean_fn=_blows_up)
        with pytest.raises(NumericalError) as excinfo:
            hessian_batch(oracle, np.zeros((2, 1)), np.array([[0.0], [1.0]]))
        assert excinfo.value.indices == [(1, 0, 0)]

    def test_backprop_gradient_matches_finite_difference(
        self, quadratic_data: LoggedDataset, fast_reward_config: RewardModelConfig
    ) -> None:
        model, _ = fit(quadratic_data, fast_reward_config, seed=0)
        s, a = quadratic_data.states[3], quadratic_data.actions[3]
        gradient = mean_action_gradient(model, s, a)
        step = 1e-6
        for k in range(2):
            shift = np.zeros(2)
            shift[k] = step
            numeric = (predict_mean(model, s, a + shift) - predict_mean(model, s, a - shift)) / (
                2.0 * step
            )
            assert gradient[k] == pytest.approx(numeric, rel=1e-4, abs=1e-7)


def test_dm_estimate_of_constant_model(quadratic: SyntheticDomain) -> None:
    states = np.random.default_rng(0).uniform(-1.0, 1.0, size=(30, 2))
    assert dm_estimate(constant_oracle(-1.25, 2), states, quadratic.target) == pytest.approx(-1.25)


def test_dm_estimate_needs_states() -> None:
    target = TargetPolicy("identity", 2, lambda s: s)
    with pytest.raises(InvalidInputError):
        dm_estimate(constant_oracle(0.0, 2), np.zeros((0, 2)), target)
