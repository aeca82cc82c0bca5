"""Lepski-style bandwidth selection over a descending grid.

Each grid point yields an estimate and a confidence half-width
``2 * sqrt(var(terms) / N)`` from the estimator's per-sample terms. Starting at
the largest bandwidth, a point is accepted while its interval intersects the
interval of every earlier accepted point; the scan stops at the first
violation and returns the last accepted bandwidth. Grid points whose estimator
fails are skipped.

Dependencies: errors, estimators.kernel, bandwidth.grid
Wired in: harness/runner.py, cli.py → evaluate --bandwidth auto-slope
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable

import numpy as np
from pydantic import BaseModel

from kmis.bandwidth.grid import BandwidthGrid
from kmis.errors import KmisError, SelectionFailedError
from kmis.estimators.kernel import KernelEvaluation
from kmis.numerics.types import FloatArray
from kmis.policies.dataset import LoggedDataset
from kmis.policies.target import TargetPolicy

_log = logging.getLogger(__name__)

GridEstimator = Callable[[LoggedDataset, TargetPolicy, float], KernelEvaluation]
"""Evaluates one bandwidth on a dataset, e.g. a closure over :func:`kernel_evaluation`."""


class SlopePoint(BaseModel):
    bandwidth: float
    estimate: float | None = None
    width: float | None = None
    error: str | None = None


class SlopeDiagnostics(BaseModel):
    selected: float
    points: list[SlopePoint]


def interval_width(terms: FloatArray) -> float:
    n = terms.shape[0]
    return 2.0 * math.sqrt(float(np.var(terms)) / n)


def _evaluate(
    data: LoggedDataset, target: TargetPolicy, grid: BandwidthGrid, estimator: GridEstimator
) -> list[SlopePoint]:
    points: list[SlopePoint] = []
    for h in grid:
        try:
            evaluation = estimator(data, target, h)
        except KmisError as exc:
            _log.debug("SLOPE grid point h=%g failed: %s", h, exc)
            points.append(SlopePoint(bandwidth=h, error=exc.code))
            continue
        points.append(
            SlopePoint(
                bandwidth=h,
                estimate=evaluation.report.estimate,
                width=interval_width(evaluation.terms),
            )
        )
    return points


def slope_select(
    data: LoggedDataset, target: TargetPolicy, grid: BandwidthGrid, estimator: GridEstimator
) -> tuple[float, SlopeDiagnostics]:
    """Select a bandwidth from ``grid``; ``estimator`` evaluates one bandwidth on ``data``.

    Raises:
        SelectionFailedError: The estimator failed at every grid point.
    """
    points = _evaluate(data, target, grid, estimator)
    accepted: list[SlopePoint] = []
    for point in points:
        if point.estimate is None or point.width is None:
            continue
        overlaps = all(
            abs(point.estimate - prev.estimate) <= point.width + prev.width
            for prev in accepted
            if prev.estimate is not None and prev.width is not None
        )
        if not overlaps:
            _log.debug("SLOPE stops at h=%g", point.bandwidth)
            break
        accepted.append(point)
    if not accepted:
        raise SelectionFailedError("Estimator failed at every bandwidth of the grid")
    selected = accepted[-1].bandwidth
    _log.info("SLOPE selected h=%g", selected)
    return selected, SlopeDiagnostics(selected=selected, points=points)
