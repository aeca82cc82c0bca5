"""Per-(sweep value, estimator) error summaries.

Variance is the population variance of the estimates over trials, so
``mse == bias_squared + variance`` holds exactly up to rounding.

Dependencies: errors, harness.runner
Wired in: cli.py → run / aggregate, harness/emit.py
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable

import numpy as np
from pydantic import BaseModel, ConfigDict

from kmis.errors import AggregationError
from kmis.estimators.report import EstimatorKind
from kmis.harness.runner import TrialRecord

_log = logging.getLogger(__name__)


class AggregateRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    sweep_value: float
    estimator: str
    kind: EstimatorKind
    n_trials: int
    """Successful trials in the group."""
    n_errors: int
    mse: float
    mse_stderr: float
    bias_squared: float
    variance: float
    mean_estimate: float
    true_value: float
    mean_bandwidth: float | None = None


def _group_key(record: TrialRecord) -> tuple[float, str]:
    return record.sweep_value, record.estimator


def _summarize(group: list[TrialRecord]) -> AggregateRow:
    first = group[0]
    ok = [record for record in group if record.ok]
    if not ok:
        raise AggregationError(f"{first.estimator} at sweep value {first.sweep_value:g}")
    estimates = np.array([record.estimate for record in ok], dtype=np.float64)
    squared = np.array([record.squared_error for record in ok], dtype=np.float64)
    bandwidths = [record.bandwidth for record in ok if record.bandwidth is not None]
    mean_estimate = float(np.mean(estimates))
    stderr = float(np.std(squared, ddof=1)) / math.sqrt(len(ok)) if len(ok) > 1 else 0.0
    return AggregateRow(
        sweep_value=first.sweep_value,
        estimator=first.estimator,
        kind=first.kind,
        n_trials=len(ok),
        n_errors=len(group) - len(ok),
        mse=float(np.mean(squared)),
        mse_stderr=stderr,
        bias_squared=(mean_estimate - first.true_value) ** 2,
        variance=float(np.var(estimates)),
        mean_estimate=mean_estimate,
        true_value=first.true_value,
        mean_bandwidth=float(np.mean(bandwidths)) if bandwidths else None,
    )


def aggregate(records: Iterable[TrialRecord], *, skip_failed: bool = False) -> list[AggregateRow]:
    """One row per (sweep value, estimator), in order of first appearance.

    Raises:
        AggregationError: A group has no successful record and ``skip_failed`` is off.
    """
    groups: dict[tuple[float, str], list[TrialRecord]] = {}
    for record in records:
        groups.setdefault(_group_key(record), []).append(record)

    rows: list[AggregateRow] = []
    for group in groups.values():
        try:
            rows.append(_summarize(group))
        except AggregationError as exc:
            if not skip_failed:
                raise
            _log.warning("Skipping %s", exc)
    return rows
