"""Action-space derivatives of a reward regressor's mean.

Hessians use central second differences with a per-sample, per-dimension step
``h_k = 1e-3 * (1 + |a_k|)``. All stencil points of a batch go through the
regressor together, in chunks, so a whole logged dataset costs a handful of
forward passes.

Dependencies: errors, numerics.linalg, reward.model
Wired in: estimators/kmis.py, bandwidth/plugin.py, harness/runner.py
"""

from __future__ import annotations

from functools import cache
from typing import Final

import numpy as np
import numpy.typing as npt

from kmis.errors import InvalidInputError, NumericalError
from kmis.numerics.linalg import SymMatrix
from kmis.numerics.types import FloatArray
from kmis.reward.model import RewardModel, RewardRegressor

FD_REL_STEP: Final[float] = 1e-3
_MAX_ROWS_PER_PASS: Final[int] = 65_536


@cache
def _stencil(d: int) -> tuple[FloatArray, tuple[tuple[int, int], ...]]:
    """Unit offsets: centre, then ``+/- e_k`` per axis, then the four corners per pair."""
    pairs = tuple((i, j) for i in range(d) for j in range(i + 1, d))
    rows: list[FloatArray] = [np.zeros(d)]
    eye = np.eye(d)
    for k in range(d):
        rows.extend((eye[k], -eye[k]))
    for i, j in pairs:
        rows.extend(
            (eye[i] + eye[j], eye[i] - eye[j], -eye[i] + eye[j], -eye[i] - eye[j])
        )
    offsets = np.array(rows)
    offsets.setflags(write=False)
    return offsets, pairs


def _evaluate_stencil(
    model: RewardRegressor, states: FloatArray, actions: FloatArray, steps: FloatArray
) -> FloatArray:
    n, d = actions.shape
    offsets, _ = _stencil(d)
    p = offsets.shape[0]
    values = np.empty((n, p))
    chunk = max(1, _MAX_ROWS_PER_PASS // p)
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        points = actions[start:stop, None, :] + offsets[None, :, :] * steps[start:stop, None, :]
        repeated = np.repeat(states[start:stop], p, axis=0)
        flat = model.predict_mean_batch(repeated, points.reshape(-1, d))
        values[start:stop] = flat.reshape(stop - start, p)
    return values


def hessian_batch(model: RewardRegressor, states: FloatArray, actions: FloatArray) -> FloatArray:
    """Symmetrized finite-difference Hessians of the predicted mean, shape (n, d, d).

    Raises:
        InvalidInputError: Mismatched or non-finite inputs.
        NumericalError: A second difference is non-finite; ``indices`` lists
            ``(sample, i, j)`` for every offending entry.
    """
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    actions = np.atleast_2d(np.asarray(actions, dtype=np.float64))
    if states.shape[0] != actions.shape[0]:
        raise InvalidInputError("states and actions must have the same number of rows")
    if actions.shape[1] != model.action_dim:
        raise InvalidInputError(
            f"Actions have {actions.shape[1]} dims, model expects {model.action_dim}"
        )
    if not (np.all(np.isfinite(states)) and np.all(np.isfinite(actions))):
        raise InvalidInputError("Hessian evaluation points must be finite")

    n, d = actions.shape
    steps = FD_REL_STEP * (1.0 + np.abs(actions))
    f = _evaluate_stencil(model, states, actions, steps)
    _, pairs = _stencil(d)
    centre = f[:, 0]

    hess = np.empty((n, d, d))
    for k in range(d):
        hess[:, k, k] = (f[:, 1 + 2 * k] - 2.0 * centre + f[:, 2 + 2 * k]) / steps[:, k] ** 2
    base = 1 + 2 * d
    for idx, (i, j) in enumerate(pairs):
        pp, pm, mp, mm = (f[:, base + 4 * idx + c] for c in range(4))
        value = (pp - pm - mp + mm) / (4.0 * steps[:, i] * steps[:, j])
        hess[:, i, j] = value
        hess[:, j, i] = value
    hess = 0.5 * (hess + np.swapaxes(hess, 1, 2))

    bad = np.argwhere(~np.isfinite(hess))
    if bad.size:
        indices = [tuple(int(x) for x in row) for row in bad]
        raise NumericalError(
            f"Non-finite second differences at {len(indices)} entries", indices=indices
        )
    return hess


def hessian_at(model: RewardRegressor, s: npt.ArrayLike, a: npt.ArrayLike) -> SymMatrix:
    """Hessian of the predicted mean with respect to ``a`` at one ``(s, a)``."""
    state = np.asarray(s, dtype=np.float64).reshape(1, -1)
    action = np.asarray(a, dtype=np.float64).reshape(1, -1)
    return SymMatrix(hessian_batch(model, state, action)[0])


def mean_action_gradient(model: RewardModel, s: npt.ArrayLike, a: npt.ArrayLike) -> FloatArray:
    """Backpropagated gradient of the predicted mean with respect to ``a``."""
    state = np.asarray(s, dtype=np.float64).reshape(1, -1)
    action = np.asarray(a, dtype=np.float64).reshape(1, -1)
    return model.mean_action_gradient_batch(state, action)[0]
