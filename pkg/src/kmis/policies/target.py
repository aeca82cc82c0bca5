"""Deterministic target policies: batched state-to-action maps."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from kmis.errors import InvalidInputError
from kmis.numerics.types import FloatArray

ActionMap = Callable[[FloatArray], FloatArray]


@dataclass(frozen=True)
class TargetPolicy:
    """Deterministic policy ``pi(s)`` evaluated on a batch of states."""

    name: str
    action_dim: int
    action_map: ActionMap

    def act(self, states: FloatArray) -> FloatArray:
        """Return target actions with shape (n, action_dim)."""
        batch = np.atleast_2d(np.asarray(states, dtype=np.float64))
        actions = np.asarray(self.action_map(batch), dtype=np.float64)
        if actions.shape != (batch.shape[0], self.action_dim):
            raise InvalidInputError(
                f"Target policy {self.name!r} produced shape {actions.shape}, "
                f"expected {(batch.shape[0], self.action_dim)}"
            )
        return actions

    def act_one(self, state: FloatArray) -> FloatArray:
        return self.act(np.asarray(state, dtype=np.float64)[None, :])[0]
