"""Off-policy value estimators for deterministic target policies."""

from kmis.estimators.direct import dm_report
from kmis.estimators.discretized import discretized_is
from kmis.estimators.kernel import KernelEvaluation, kernel_evaluation, kernel_is
from kmis.estimators.kmis import kmis_estimate, kmis_metrics, target_hessians
from kmis.estimators.report import EstimatorKind, EstimatorReport

__all__ = [
    "EstimatorKind",
    "EstimatorReport",
    "KernelEvaluation",
    "discretized_is",
    "dm_report",
    "kernel_evaluation",
    "kernel_is",
    "kmis_estimate",
    "kmis_metrics",
    "target_hessians",
]
