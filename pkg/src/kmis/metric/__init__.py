"""Hessian-derived local Mahalanobis metrics and kernel-input transforms."""

from kmis.metric.mahalanobis import (
    DEFAULT_EPSILON_SCALE,
    DistanceContribution,
    MetricBatch,
    StateMetric,
    mahalanobis_distance,
    metric_distance_decomposition,
    optimal_metric,
    regularized_metric,
    regularized_metric_batch,
    transform_matrix,
    transform_stack,
)

__all__ = [
    "DEFAULT_EPSILON_SCALE",
    "DistanceContribution",
    "MetricBatch",
    "StateMetric",
    "mahalanobis_distance",
    "metric_distance_decomposition",
    "optimal_metric",
    "regularized_metric",
    "regularized_metric_batch",
    "transform_matrix",
    "transform_stack",
]
