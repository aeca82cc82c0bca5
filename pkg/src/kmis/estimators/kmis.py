"""Kernel IS with a locally learned metric per logged state.

The reward regressor's Hessian at each ``(s_i, pi(s_i))`` yields a regularized
metric and its factor ``L_i``; the kernel then measures distances in that
metric. Hessians that vanish fall back to the identity, so a flat reward model
reproduces plain kernel IS bit for bit.

Dependencies: reward.hessian, metric.mahalanobis, estimators.kernel
Wired in: harness/runner.py, cli.py → evaluate --estimator kmis
"""

from __future__ import annotations

import logging

import numpy as np

from kmis.estimators.kernel import kernel_evaluation
from kmis.estimators.report import EstimatorKind, EstimatorReport
from kmis.metric.mahalanobis import DEFAULT_EPSILON_SCALE, MetricBatch, regularized_metric_batch
from kmis.numerics.types import FloatArray
from kmis.policies.dataset import LoggedDataset
from kmis.policies.target import TargetPolicy
from kmis.reward.hessian import hessian_batch
from kmis.reward.model import RewardRegressor

_log = logging.getLogger(__name__)


def target_hessians(
    model: RewardRegressor, data: LoggedDataset, target: TargetPolicy
) -> FloatArray:
    """Reward Hessians at every logged state's target action, shape (N, D_A, D_A)."""
    return hessian_batch(model, data.states, target.act(data.states))


def kmis_metrics(
    model: RewardRegressor,
    data: LoggedDataset,
    target: TargetPolicy,
    epsilon_scale: float = DEFAULT_EPSILON_SCALE,
    hessians: FloatArray | None = None,
) -> MetricBatch:
    """Regularized per-sample metrics; pass ``hessians`` to reuse a previous evaluation."""
    if hessians is None:
        hessians = target_hessians(model, data, target)
    metrics = regularized_metric_batch(hessians, epsilon_scale)
    degenerate = int(np.count_nonzero(metrics.degenerate))
    if degenerate:
        _log.debug("%d of %d states use the identity metric", degenerate, data.n)
    return metrics


def kmis_estimate(
    data: LoggedDataset,
    target: TargetPolicy,
    reward_model: RewardRegressor,
    h: float,
    self_normalize: bool = True,
    epsilon_scale: float = DEFAULT_EPSILON_SCALE,
) -> EstimatorReport:
    """Metric-applied kernel IS estimate with per-sample metrics from ``reward_model``."""
    metrics = kmis_metrics(reward_model, data, target, epsilon_scale)
    evaluation = kernel_evaluation(
        data, target, h, self_normalize, metrics.l_hat, estimator=EstimatorKind.KMIS
    )
    degenerate = int(np.count_nonzero(metrics.degenerate))
    diagnostics = {**evaluation.report.diagnostics, "identity_metric_states": degenerate}
    return evaluation.report.model_copy(update={"diagnostics": diagnostics})
