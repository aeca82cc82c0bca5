"""Estimator output model and the weight diagnostics every IS estimator shares.

Dependencies: errors
Wired in: estimators/*, bandwidth/slope.py, harness/runner.py, cli.py → evaluate
"""

from __future__ import annotations

from enum import StrEnum
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from kmis.errors import EmptyOverlapError
from kmis.numerics.types import FloatArray


class EstimatorKind(StrEnum):
    """Estimator identifiers used in configs, records and the CLI."""

    DM = "dm"
    KIS = "kis"
    KMIS = "kmis"
    DISC = "disc"


class EstimatorReport(BaseModel):
    """One policy-value estimate with its weight diagnostics.

    ``weight_sum`` is the sum of raw importance weights (kernel or indicator over
    behavior density/mass); ``max_weight_share`` and ``effective_sample_size``
    describe how concentrated those weights are. Both are 0 when every weight is 0.
    """

    model_config = ConfigDict(frozen=True)

    estimator: EstimatorKind
    estimate: float
    n_used: int
    bandwidth: float | None = None
    self_normalized: bool = False
    weight_sum: float = 0.0
    max_weight_share: float = Field(default=0.0, ge=0.0, le=1.0)
    effective_sample_size: float = 0.0
    metric_applied: bool = False
    diagnostics: dict[str, Any] = Field(default_factory=dict[str, Any])


def weighted_estimate(
    weights: FloatArray, rewards: FloatArray, self_normalize: bool, scale: float = 1.0
) -> tuple[float, FloatArray]:
    """Return ``(estimate, per-sample terms)``; the estimate is the mean of the terms.

    Unnormalized terms are ``w_i r_i / scale``; self-normalized terms are
    ``w_i r_i / mean(w)`` and the estimate is ``sum(w r) / sum(w)``.

    Raises:
        EmptyOverlapError: ``self_normalize`` with a zero weight sum.
    """
    weighted = weights * rewards
    if not self_normalize:
        terms = weighted / scale
        return float(np.mean(terms)), terms
    total = float(np.sum(weights))
    if not total > 0.0:
        raise EmptyOverlapError(total)
    terms = weighted / (total / weights.shape[0])
    return float(np.sum(weighted)) / total, terms


def weight_diagnostics(weights: FloatArray) -> dict[str, float]:
    """Weight sum, largest single-weight share and effective sample size."""
    total = float(np.sum(weights))
    if not total > 0.0:
        return {"weight_sum": total, "max_weight_share": 0.0, "effective_sample_size": 0.0}
    return {
        "weight_sum": total,
        "max_weight_share": min(1.0, float(np.max(weights)) / total),
        "effective_sample_size": total * total / float(np.sum(weights * weights)),
    }
