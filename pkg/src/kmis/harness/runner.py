"""Seeded multi-trial experiment runner.

For every (sweep value, trial) pair the runner regenerates the logged data with
seed ``base_seed + trial``, fits one reward model and evaluates every configured
estimator on that same dataset. The fitted model, its Hessians, the per-sample
metrics and the plug-in bandwidth are computed at most once per trial and shared
by DM, KMIS and the Kallus rule. Estimator failures become error-tagged records
and the run continues.

Trials run on a thread pool; each owns its generator and model, and records are
collected in submission order, so the output does not depend on the worker count.

Dependencies: domains, estimators, bandwidth, reward, infra.otel_tracing, harness.config
Wired in: cli.py → run
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Protocol

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from kmis.bandwidth.plugin import BandwidthChoice, kallus_bandwidth
from kmis.bandwidth.slope import slope_select
from kmis.domains.base import Domain
from kmis.domains.registry import build_domain
from kmis.errors import InvalidInputError, KmisError, NumericalError
from kmis.estimators.direct import dm_report
from kmis.estimators.discretized import discretized_is
from kmis.estimators.kernel import KernelEvaluation, kernel_evaluation
from kmis.estimators.kmis import kmis_metrics, target_hessians
from kmis.estimators.report import EstimatorKind, EstimatorReport
from kmis.harness.config import BandwidthMode, EstimatorSpec, ExperimentConfig, SweepAxis
from kmis.infra.otel_tracing import trace_span
from kmis.metric.mahalanobis import MetricBatch
from kmis.numerics.types import FloatArray
from kmis.policies.dataset import LoggedDataset
from kmis.reward.config import RewardModelConfig
from kmis.reward.model import RewardRegressor, fit

_log = logging.getLogger(__name__)

RewardFactory = Callable[[LoggedDataset, int], RewardRegressor]
"""Builds the reward regressor for one trial from its dataset and seed."""


class TrialProgress(Protocol):
    def trial_done(self, sweep_value: float, failed: bool) -> None: ...


class TrialRecord(BaseModel):
    """One estimator's result on one trial; ``error`` holds the failure code."""

    model_config = ConfigDict(frozen=True)

    trial: int
    seed: int
    sweep_value: float
    estimator: str
    kind: EstimatorKind
    n: int
    bandwidth: float | None = None
    estimate: float | None = None
    squared_error: float | None = Field(default=None, ge=0.0)
    true_value: float
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


TRIAL_COLUMNS: list[str] = list(TrialRecord.model_fields)


def fitted_reward_factory(config: RewardModelConfig) -> RewardFactory:
    """Fit the network regressor with the trial seed."""

    def _fit(data: LoggedDataset, seed: int) -> RewardRegressor:
        model, _ = fit(data, config, seed)
        return model

    return _fit


@dataclass(frozen=True)
class _Task:
    trial: int
    sweep_value: float
    domain: Domain


class _TrialState:
    """Per-trial quantities computed on first use; failures are cached too."""

    def __init__(
        self,
        config: ExperimentConfig,
        task: _Task,
        data: LoggedDataset,
        reward_factory: RewardFactory,
    ) -> None:
        self.config = config
        self.task = task
        self.data = data
        self.seed = config.base_seed + task.trial
        self._reward_factory = reward_factory
        self._memo: dict[str, Any] = {}

    def _once[T](self, key: str, factory: Callable[[], T]) -> T:
        if key in self._memo:
            cached = self._memo[key]
            if isinstance(cached, KmisError):
                raise cached
            return cached
        try:
            value = factory()
        except KmisError as exc:
            self._memo[key] = exc
            raise
        self._memo[key] = value
        return value

    @property
    def computed_metrics(self) -> MetricBatch | None:
        cached = self._memo.get("metrics")
        return cached if isinstance(cached, MetricBatch) else None

    def model(self) -> RewardRegressor:
        return self._once("model", lambda: self._reward_factory(self.data, self.seed))

    def hessians(self) -> FloatArray:
        return self._once(
            "hessians", lambda: target_hessians(self.model(), self.data, self.task.domain.target)
        )

    def metrics(self) -> MetricBatch:
        return self._once(
            "metrics",
            lambda: kmis_metrics(
                self.model(),
                self.data,
                self.task.domain.target,
                self.config.epsilon_scale,
                self.hessians(),
            ),
        )

    def kallus(self) -> BandwidthChoice:
        domain = self.task.domain
        return self._once(
            "kallus",
            lambda: kallus_bandwidth(
                self.model(),
                self.data,
                domain.target,
                domain.behavior,
                self.config.bandwidth_grid(),
                self.hessians(),
            ),
        )

    def kernel(self, spec: EstimatorSpec, h: float) -> KernelEvaluation:
        transform = self.metrics().l_hat if spec.kind is EstimatorKind.KMIS else None
        return kernel_evaluation(
            self.data,
            self.task.domain.target,
            h,
            spec.self_normalize,
            transform,
            estimator=spec.kind,
        )

    def slope(self, spec: EstimatorSpec) -> float:
        def _select() -> float:
            selected, _ = slope_select(
                self.data,
                self.task.domain.target,
                self.config.bandwidth_grid(),
                lambda _data, _target, h: self.kernel(spec, h),
            )
            return selected

        return self._once(f"slope:{spec.kind}:{spec.self_normalize}", _select)

    def bandwidth(self, spec: EstimatorSpec) -> float:
        mode = spec.bandwidth_mode(self.config.sweep.axis)
        if mode is None:
            return self.task.sweep_value
        if mode is BandwidthMode.KALLUS:
            return self.kallus().bandwidth
        if mode is BandwidthMode.SLOPE:
            return self.slope(spec)
        return float(mode)

    def evaluate(self, spec: EstimatorSpec) -> EstimatorReport:
        domain = self.task.domain
        match spec.kind:
            case EstimatorKind.DM:
                return dm_report(self.model(), self.data, domain.target)
            case EstimatorKind.DISC:
                return discretized_is(
                    self.data,
                    domain.target,
                    domain.behavior,
                    spec.bins_per_dim,
                    spec.self_normalize,
                )
            case EstimatorKind.KIS | EstimatorKind.KMIS:
                return self.kernel(spec, self.bandwidth(spec)).report


class ExperimentRunner:
    """Runs one :class:`ExperimentConfig`; :attr:`metrics_frame` holds the metric export."""

    def __init__(
        self,
        config: ExperimentConfig,
        *,
        workers: int = 1,
        progress: TrialProgress | None = None,
        reward_factory: RewardFactory | None = None,
    ) -> None:
        if workers < 1:
            raise InvalidInputError(f"workers must be >= 1, got {workers}")
        self.config = config
        self.workers = workers
        self.progress = progress
        self.reward_factory = reward_factory or fitted_reward_factory(config.reward_config())
        self.metrics_frame: pd.DataFrame | None = None

    def _domains(self) -> dict[float, Domain]:
        spec = self.config.domain
        axis = self.config.sweep.axis
        values = self.config.sweep.values

        def _build(dummy_dims: int, noise_sd: float) -> Domain:
            return build_domain(
                spec.name,
                dummy_dims=dummy_dims,
                noise_sd=noise_sd,
                warfarin_csv=spec.warfarin_csv,
                target_bmi=spec.target_bmi,
            )

        if axis is SweepAxis.DUMMY_DIMS:
            domains = {value: _build(int(value), spec.noise_sd) for value in values}
        elif axis is SweepAxis.NOISE_SD:
            domains = {value: _build(spec.dummy_dims, value) for value in values}
        else:
            domains = dict.fromkeys(values, _build(spec.dummy_dims, spec.noise_sd))
        for domain in domains.values():
            _ = domain.true_value
        return domains

    def tasks(self) -> list[_Task]:
        domains = self._domains()
        return [
            _Task(trial=trial, sweep_value=value, domain=domains[value])
            for value in self.config.sweep.values
            for trial in range(self.config.n_trials)
        ]

    def run(self) -> list[TrialRecord]:
        tasks = self.tasks()
        _log.info("Running %d trials on %d worker(s)", len(tasks), self.workers)
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            futures = [pool.submit(self._run_trial, task) for task in tasks]
            outcomes = [future.result() for future in futures]

        records = [record for trial_records, _ in outcomes for record in trial_records]
        frames = [frame for _, frame in outcomes if frame is not None]
        self.metrics_frame = pd.concat(frames, ignore_index=True) if frames else None
        return records

    def _run_trial(self, task: _Task) -> tuple[list[TrialRecord], pd.DataFrame | None]:
        config = self.config
        seed = config.base_seed + task.trial
        n = config.sample_size_for(task.sweep_value)
        attributes: dict[str, str | int | float | bool] = {
            "kmis.domain": task.domain.name,
            "kmis.sweep_value": task.sweep_value,
            "kmis.seed": seed,
            "kmis.n": n,
        }
        with trace_span("kmis.trial", attributes) as span:
            records, state = self._trial_records(task, seed, n)
            errors = sum(1 for record in records if not record.ok)
            span["kmis.records"] = len(records)
            span["kmis.errors"] = errors

        frame = None
        if state is not None and config.export_metrics and task.trial == 0:
            frame = self._metrics_export(state)
        _log.info(
            "Trial %d at %s=%g done (%d errors)",
            task.trial,
            config.sweep.axis,
            task.sweep_value,
            errors,
        )
        if self.progress is not None:
            self.progress.trial_done(task.sweep_value, failed=errors > 0)
        return records, frame

    def _trial_records(
        self, task: _Task, seed: int, n: int
    ) -> tuple[list[TrialRecord], _TrialState | None]:
        config = self.config
        truth = task.domain.true_value
        base = {"trial": task.trial, "seed": seed, "sweep_value": task.sweep_value, "n": n}
        specs = config.estimators
        labels = config.labels
        try:
            data = task.domain.generate(n, seed)
        except KmisError as exc:
            _log.warning("Trial %d: data generation failed: %s", task.trial, exc)
            return [
                TrialRecord(
                    **base, estimator=label, kind=spec.kind, true_value=truth, error=exc.code
                )
                for spec, label in zip(specs, labels, strict=True)
            ], None

        state = _TrialState(config, task, data, self.reward_factory)
        records: list[TrialRecord] = []
        for spec, label in zip(specs, labels, strict=True):
            try:
                report = state.evaluate(spec)
                if not math.isfinite(report.estimate):
                    raise NumericalError(f"{label} produced a non-finite estimate")
            except KmisError as exc:
                _log.warning("Trial %d: %s failed: %s", task.trial, label, exc)
                records.append(
                    TrialRecord(
                        **base, estimator=label, kind=spec.kind, true_value=truth, error=exc.code
                    )
                )
                continue
            records.append(
                TrialRecord(
                    **base,
                    estimator=label,
                    kind=spec.kind,
                    bandwidth=report.bandwidth,
                    estimate=report.estimate,
                    squared_error=(report.estimate - truth) ** 2,
                    true_value=truth,
                )
            )
        return records, state

    def _metrics_export(self, state: _TrialState) -> pd.DataFrame | None:
        metrics = state.computed_metrics
        if metrics is None:
            return None
        rows = min(self.config.metrics_export_rows, state.data.n)
        return metrics_table(
            state.data.states[:rows],
            state.task.domain.target.act(state.data.states[:rows]),
            metrics,
            rows,
            sweep_value=state.task.sweep_value,
        )


def metrics_table(
    states: FloatArray,
    target_actions: FloatArray,
    metrics: MetricBatch,
    rows: int,
    *,
    sweep_value: float,
) -> pd.DataFrame:
    """Plot-ready export of the first ``rows`` learned metrics.

    Columns: ``sweep_value, row, s_*, pi_*, eig_*`` (metric eigenvalues),
    ``u{k}_{j}`` (component ``j`` of eigenvector ``k``) and ``identity``.
    """
    eigenvalues = metrics.eigenvalues()[:rows]
    basis = metrics.basis[:rows]
    columns: dict[str, Any] = {
        "sweep_value": np.full(rows, sweep_value),
        "row": np.arange(rows),
    }
    for j in range(states.shape[1]):
        columns[f"s_{j + 1}"] = states[:, j]
    d = target_actions.shape[1]
    for j in range(d):
        columns[f"pi_{j + 1}"] = target_actions[:, j]
    for k in range(d):
        columns[f"eig_{k + 1}"] = eigenvalues[:, k]
    for k in range(d):
        for j in range(d):
            columns[f"u{k + 1}_{j + 1}"] = basis[:, j, k]
    columns["identity"] = metrics.degenerate[:rows]
    return pd.DataFrame(columns)


def run_experiment(
    config: ExperimentConfig,
    *,
    workers: int = 1,
    progress: TrialProgress | None = None,
    reward_factory: RewardFactory | None = None,
) -> list[TrialRecord]:
    """Records for every (sweep value, trial, estimator), in that nesting order."""
    runner = ExperimentRunner(
        config, workers=workers, progress=progress, reward_factory=reward_factory
    )
    return runner.run()
