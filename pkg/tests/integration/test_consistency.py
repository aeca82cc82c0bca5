"""End-to-end accuracy checks on the synthetic domains.

These fit real reward models or use large samples, so they are marked slow and
only run with ``pytest -m slow``.
"""

from __future__ import annotations

import numpy as np
import pytest

from kmis.bandwidth.plugin import kallus_bandwidth
from kmis.domains.synthetic import SyntheticDomain, make_multimodal, monte_carlo_value
from kmis.estimators.direct import dm_report
from kmis.estimators.kernel import kernel_is
from kmis.estimators.kmis import kmis_estimate
from kmis.harness.aggregate import aggregate
from kmis.harness.config import ExperimentConfig
from kmis.harness.runner import TrialRecord, run_experiment
from kmis.reward.config import RewardModelConfig
from kmis.reward.model import fit

pytestmark = pytest.mark.slow


def test_self_normalized_kernel_is_is_consistent(quadratic: SyntheticDomain) -> None:
    errors = [
        kernel_is(quadratic.generate(20_000, seed=seed), quadratic.target, 0.05).estimate
        for seed in range(3)
    ]
    assert abs(float(np.mean(errors))) < 0.3


def test_learned_metric_reduces_quadratic_bias(quadratic: SyntheticDomain) -> None:
    oracle = quadratic.oracle_model()
    kis_errors: list[float] = []
    kmis_errors: list[float] = []
    for seed in range(3):
        data = quadratic.generate(20_000, seed=seed)
        kis_errors.append(abs(kernel_is(data, quadratic.target, 0.2).estimate))
        kmis_errors.append(abs(kmis_estimate(data, quadratic.target, oracle, 0.2).estimate))
    assert np.mean(kmis_errors) < np.mean(kis_errors)


def test_kallus_bandwidth_shrinks_with_sample_size(quadratic: SyntheticDomain) -> None:
    oracle = quadratic.oracle_model()
    small = quadratic.generate(1_000, seed=1)
    large = quadratic.generate(16_000, seed=1)
    h_small = kallus_bandwidth(oracle, small, quadratic.target, quadratic.behavior).bandwidth
    h_large = kallus_bandwidth(oracle, large, quadratic.target, quadratic.behavior).bandwidth
    # h* scales like N^(-1/6) in two action dimensions
    assert h_large / h_small == pytest.approx(16.0 ** (-1.0 / 6.0), rel=0.15)


def test_fitted_model_direct_method(
    quadratic: SyntheticDomain, fast_reward_config: RewardModelConfig
) -> None:
    data = quadratic.generate(3_000, seed=5)
    model, report = fit(data, fast_reward_config.with_overrides(max_epochs=200), seed=5)
    assert report.best_validation_nll < report.initial_validation_nll
    estimate = dm_report(model, data, quadratic.target).estimate
    assert abs(estimate - quadratic.true_value) < 1.5


def test_multimodal_kernel_is_close_to_truth() -> None:
    domain = make_multimodal()
    data = domain.generate(20_000, seed=2)
    estimate = kernel_is(data, domain.target, 0.05).estimate
    assert estimate == pytest.approx(domain.true_value, abs=0.2)


def test_full_experiment_with_fitted_models() -> None:
    config = ExperimentConfig.model_validate(
        {
            "domain": {"name": "quadratic"},
            "estimators": [
                {"kind": "dm"},
                {"kind": "kis"},
                {"kind": "kmis"},
                {"kind": "kmis", "bandwidth": "slope"},
                {"kind": "disc"},
            ],
            "sweep": {"axis": "sample_size", "values": [1_000, 4_000]},
            "n_trials": 2,
            "reward": {"hidden_sizes": [16, 16], "max_epochs": 60, "dropout": 0.0},
        }
    )
    records = run_experiment(config, workers=2)
    assert len(records) == 2 * 2 * 5
    assert all(record.ok for record in records)
    rows = aggregate(records)
    assert {row.estimator for row in rows} == {
        "dm",
        "kis-kallus",
        "kmis-kallus",
        "kmis-slope",
        "disc-b10",
    }
    assert all(np.isfinite(row.mse) for row in rows)


# ============================================================================
# Sweeps with fitted reward models and Kallus bandwidths
# ============================================================================


def _kallus_sweep(domain: dict[str, object], axis: str, values: list[float]) -> list[TrialRecord]:
    config = ExperimentConfig.model_validate(
        {
            "domain": domain,
            "estimators": [{"kind": "kis"}, {"kind": "kmis"}],
            "sweep": {"axis": axis, "values": values},
            "sample_size": 10_000,
            "n_trials": 20,
        }
    )
    records = run_experiment(config, workers=4)
    assert all(record.ok for record in records)
    return records


def test_kmis_beats_kernel_is_on_quadratic() -> None:
    records = _kallus_sweep({"name": "quadratic"}, "sample_size", [10_000])
    errors: dict[str, dict[int, float]] = {"kis-kallus": {}, "kmis-kallus": {}}
    for record in records:
        assert record.squared_error is not None
        errors[record.estimator][record.trial] = record.squared_error
    kis, kmis = errors["kis-kallus"], errors["kmis-kallus"]
    assert np.mean(list(kmis.values())) < np.mean(list(kis.values()))
    wins = sum(kmis[trial] < kis[trial] for trial in kis)
    assert wins >= 14


def test_bias_dominates_as_dummy_dims_grow() -> None:
    records = _kallus_sweep({"name": "abs_error"}, "dummy_dims", [0, 2, 6])
    rows = {(row.sweep_value, row.estimator): row for row in aggregate(records)}
    shares = [
        rows[(dims, "kis-kallus")].bias_squared / rows[(dims, "kis-kallus")].mse
        for dims in (0.0, 2.0, 6.0)
    ]
    assert shares == sorted(shares)
    assert rows[(6.0, "kmis-kallus")].mse < rows[(6.0, "kis-kallus")].mse


def test_mse_falls_with_sample_size(quadratic: SyntheticDomain) -> None:
    records = _kallus_sweep({"name": "quadratic"}, "sample_size", [2_500, 40_000])
    rows = {(row.sweep_value, row.estimator): row for row in aggregate(records)}
    for label in ("kis-kallus", "kmis-kallus"):
        assert rows[(40_000.0, label)].mse < rows[(2_500.0, label)].mse
    value, stderr = monte_carlo_value(quadratic, 200_000, seed=0)
    assert abs(value - quadratic.true_value) <= 3.0 * stderr
    bandwidths = [rows[(size, "kmis-kallus")].mean_bandwidth for size in (2_500.0, 40_000.0)]
    assert bandwidths[0] is not None
    assert bandwidths[1] is not None
    assert bandwidths[1] < bandwidths[0]


def test_multimodal_kmis_recovers_true_value() -> None:
    config = ExperimentConfig.model_validate(
        {
            "domain": {"name": "multimodal"},
            "estimators": [{"kind": "kmis"}],
            "sweep": {"axis": "sample_size", "values": [40_000]},
            "n_trials": 20,
        }
    )
    records = run_experiment(config, workers=4)
    assert all(record.ok for record in records)
    (row,) = aggregate(records)
    assert row.true_value == -1.0
    assert abs(row.mean_estimate + 1.0) <= 0.1
