"""Discretized importance sampling baseline.

The action box (data-derived unless given) is cut into ``bins_per_dim``
intervals per dimension. A logged sample counts when its action shares the
target action's bin, weighted by the inverse behavior mass of that bin. Target
actions outside the box are clamped to the nearest bin.

Dependencies: errors, policies.behavior, estimators.report
Wired in: harness/runner.py, cli.py → evaluate --estimator disc
"""

from __future__ import annotations

import numpy as np

from kmis.errors import InvalidInputError
from kmis.estimators.report import (
    EstimatorKind,
    EstimatorReport,
    weight_diagnostics,
    weighted_estimate,
)
from kmis.numerics.types import FloatArray, IntArray
from kmis.policies.behavior import BehaviorPolicy
from kmis.policies.dataset import LoggedDataset
from kmis.policies.target import TargetPolicy

ActionBox = tuple[FloatArray, FloatArray]


def _bin_index(actions: FloatArray, lo: FloatArray, width: FloatArray, bins: int) -> IntArray:
    index = np.floor((actions - lo) / width).astype(np.int64)
    return np.clip(index, 0, bins - 1)


def discretized_is(
    data: LoggedDataset,
    target: TargetPolicy,
    behavior: BehaviorPolicy,
    bins_per_dim: int = 10,
    self_normalize: bool = True,
    box: ActionBox | None = None,
) -> EstimatorReport:
    """Indicator IS over the bin of each target action.

    A dimension whose logged actions are all equal gets a unit-width box.

    Raises:
        InvalidInputError: ``bins_per_dim < 1`` or a malformed box.
        EmptyOverlapError: ``self_normalize`` and no sample shares its target bin.
    """
    if bins_per_dim < 1:
        raise InvalidInputError(f"bins_per_dim must be >= 1, got {bins_per_dim}")
    if box is None:
        lo = data.actions.min(axis=0)
        hi = data.actions.max(axis=0)
        hi = np.where(hi > lo, hi, lo + 1.0)
    else:
        lo = np.asarray(box[0], dtype=np.float64)
        hi = np.asarray(box[1], dtype=np.float64)
        if lo.shape != (data.action_dim,) or hi.shape != lo.shape or np.any(hi <= lo):
            raise InvalidInputError("Action box needs lo < hi for every action dimension")
    width = (hi - lo) / bins_per_dim

    target_bins = _bin_index(target.act(data.states), lo, width, bins_per_dim)
    logged_bins = _bin_index(data.actions, lo, width, bins_per_dim)
    matched = np.all(target_bins == logged_bins, axis=1)

    lows = lo + target_bins * width
    highs = lo + (target_bins + 1) * width
    mass = behavior.bin_mass(data.states, lows, highs)
    safe_mass = np.where(mass > 0.0, mass, 1.0)
    weights = np.where(matched & (mass > 0.0), 1.0 / safe_mass, 0.0)

    estimate, _ = weighted_estimate(weights, data.rewards, self_normalize)
    return EstimatorReport(
        estimator=EstimatorKind.DISC,
        estimate=estimate,
        n_used=data.n,
        self_normalized=self_normalize,
        diagnostics={"bins_per_dim": bins_per_dim, "matched": int(np.count_nonzero(matched))},
        **weight_diagnostics(weights),
    )
