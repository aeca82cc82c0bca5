"""Kernel-relaxed importance sampling for deterministic target policies.

Each logged action is compared with the target action through a Gaussian
kernel of bandwidth ``h``. With a per-sample transform stack ``L`` the kernel
input becomes ``L_i^T (a_i - pi(s_i)) / h``, i.e. the distance is measured in
the local metric ``A_i = L_i L_i^T``. No boundary correction is applied.

Dependencies: errors, numerics.kernels, estimators.report
Wired in: estimators/kmis.py, bandwidth/slope.py, harness/runner.py, cli.py
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Final

import numpy as np

from kmis.errors import InvalidInputError
from kmis.estimators.report import (
    EstimatorKind,
    EstimatorReport,
    weight_diagnostics,
    weighted_estimate,
)
from kmis.numerics.kernels import gaussian_kernel_rows
from kmis.numerics.types import FloatArray
from kmis.policies.dataset import LoggedDataset
from kmis.policies.target import TargetPolicy

KERNEL_UNDERFLOW: Final[float] = 1e-300


@dataclass(frozen=True, eq=False)
class KernelEvaluation:
    """A kernel IS report plus the per-sample terms whose mean is the estimate."""

    report: EstimatorReport
    terms: FloatArray


def kernel_inputs(
    data: LoggedDataset, target_actions: FloatArray, h: float, transform: FloatArray | None
) -> FloatArray:
    """Scaled kernel arguments ``u_i``, shape (N, D_A)."""
    diff = data.actions - target_actions
    if transform is not None:
        diff = np.einsum("nij,ni->nj", transform, diff)
    return diff / h


def kernel_evaluation(
    data: LoggedDataset,
    target: TargetPolicy,
    h: float,
    self_normalize: bool = True,
    transform: FloatArray | None = None,
    *,
    estimator: EstimatorKind | None = None,
) -> KernelEvaluation:
    """Evaluate the kernel IS estimator and keep its per-sample terms.

    Raises:
        InvalidInputError: ``h`` not positive or a transform stack of the wrong shape.
        EmptyOverlapError: ``self_normalize`` and every kernel weight underflows.
    """
    if not (np.isfinite(h) and h > 0.0):
        raise InvalidInputError(f"Bandwidth must be positive and finite, got {h}")
    d = data.action_dim
    if transform is not None:
        transform = np.asarray(transform, dtype=np.float64)
        if transform.shape != (data.n, d, d):
            raise InvalidInputError(
                f"Transform stack must have shape {(data.n, d, d)}, got {transform.shape}"
            )
    target_actions = target.act(data.states)
    kernel = gaussian_kernel_rows(kernel_inputs(data, target_actions, h, transform))
    kernel = np.where(kernel < KERNEL_UNDERFLOW, 0.0, kernel)
    weights = kernel / data.behavior_density

    estimate, terms = weighted_estimate(weights, data.rewards, self_normalize, scale=h**d)
    kind = estimator or (EstimatorKind.KIS if transform is None else EstimatorKind.KMIS)
    report = EstimatorReport(
        estimator=kind,
        estimate=estimate,
        n_used=data.n,
        bandwidth=float(h),
        self_normalized=self_normalize,
        metric_applied=transform is not None,
        **weight_diagnostics(weights),
    )
    return KernelEvaluation(report=report, terms=terms)


def kernel_is(
    data: LoggedDataset,
    target: TargetPolicy,
    h: float,
    self_normalize: bool = True,
    transform: FloatArray | None = None,
) -> EstimatorReport:
    """Kernel IS estimate of the target policy value (see :func:`kernel_evaluation`)."""
    return kernel_evaluation(data, target, h, self_normalize, transform).report
