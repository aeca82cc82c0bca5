"""Plug-in estimates of the LOMSE constants from a reward regressor.

``C_b`` squares the dataset mean of the action Laplacian (mean first, then
square); ``C_v`` averages the predicted second moment over the clipped behavior
density at the target action and multiplies by the kernel roughness.

Dependencies: reward.hessian, numerics.kernels, bandwidth.lomse, bandwidth.grid
Wired in: harness/runner.py, cli.py → evaluate --bandwidth auto-kallus
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from kmis.bandwidth.grid import BandwidthGrid, synthetic_grid
from kmis.bandwidth.lomse import LomseConstants, optimal_bandwidth
from kmis.errors import DegenerateBiasError, InvalidInputError
from kmis.numerics.kernels import kernel_roughness
from kmis.numerics.types import FloatArray
from kmis.policies.behavior import BehaviorPolicy
from kmis.policies.dataset import LoggedDataset
from kmis.policies.target import TargetPolicy
from kmis.reward.hessian import hessian_batch
from kmis.reward.model import RewardRegressor

_log = logging.getLogger(__name__)


def estimate_cb(
    model: RewardRegressor,
    data: LoggedDataset,
    target: TargetPolicy,
    hessians: FloatArray | None = None,
) -> float:
    """``(mean_s trace H(s, pi(s)))^2 / 4``; pass ``hessians`` to reuse them."""
    if hessians is None:
        hessians = hessian_batch(model, data.states, target.act(data.states))
    laplacian = float(np.mean(np.trace(hessians, axis1=1, axis2=2)))
    return 0.25 * laplacian * laplacian


def estimate_cv(
    model: RewardRegressor,
    data: LoggedDataset,
    target: TargetPolicy,
    behavior: BehaviorPolicy,
) -> float:
    """``R(K) * mean_s E[r^2 | s, pi(s)] / pi_b(pi(s) | s)`` with the clipped density.

    States whose target action lies outside the behavior support carry no kernel
    weight as ``h -> 0`` and are left out of the average.

    Raises:
        InvalidInputError: No state has its target action inside the behavior support.
    """
    actions = target.act(data.states)
    density = behavior.density(data.states, actions)
    covered = density > 0.0
    n_covered = int(np.count_nonzero(covered))
    if n_covered == 0:
        raise InvalidInputError("No logged state has its target action in the behavior support")
    if n_covered < data.n:
        _log.debug("C_v averages over %d of %d states with support", n_covered, data.n)
    second = model.predict_second_moment_batch(data.states[covered], actions[covered])
    return kernel_roughness(data.action_dim) * float(np.mean(second / density[covered]))


@dataclass(frozen=True)
class BandwidthChoice:
    bandwidth: float
    constants: LomseConstants
    fallback: bool
    """True when the bias constant vanished and the grid median was used."""


def kallus_bandwidth(
    model: RewardRegressor,
    data: LoggedDataset,
    target: TargetPolicy,
    behavior: BehaviorPolicy,
    grid: BandwidthGrid | None = None,
    hessians: FloatArray | None = None,
) -> BandwidthChoice:
    """LOMSE-optimal bandwidth from plug-in constants, or the grid median if ``C_b = 0``."""
    constants = LomseConstants(
        c_b=estimate_cb(model, data, target, hessians),
        c_v=estimate_cv(model, data, target, behavior),
        n=data.n,
        d_a=data.action_dim,
    )
    try:
        h = optimal_bandwidth(constants)
    except DegenerateBiasError:
        h = (grid or synthetic_grid()).median
        _log.warning("Bias constant is zero; falling back to grid median h=%g", h)
        return BandwidthChoice(bandwidth=h, constants=constants, fallback=True)
    _log.info("Plug-in bandwidth h=%.5g (C_b=%.4g, C_v=%.4g)", h, constants.c_b, constants.c_v)
    return BandwidthChoice(bandwidth=h, constants=constants, fallback=False)
