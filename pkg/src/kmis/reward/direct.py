"""Direct-method value estimate from a reward regressor."""

from __future__ import annotations

import numpy as np

from kmis.errors import InvalidInputError
from kmis.numerics.types import FloatArray
from kmis.policies.target import TargetPolicy
from kmis.reward.model import RewardRegressor


def dm_estimate(model: RewardRegressor, states: FloatArray, target: TargetPolicy) -> float:
    """Mean predicted reward at ``(s, pi(s))`` over ``states``."""
    batch = np.asarray(states, dtype=np.float64)
    if batch.size == 0:
        raise InvalidInputError("dm_estimate needs at least one state")
    batch = np.atleast_2d(batch)
    return float(np.mean(model.predict_mean_batch(batch, target.act(batch))))
