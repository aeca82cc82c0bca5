"""Training configuration for the reward regressor.

Dependencies: errors
Wired in: reward/model.py, reward/selection.py, harness/config.py, cli.py
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import Any

from kmis.errors import InvalidInputError


@dataclass(frozen=True)
class RewardModelConfig:
    """Immutable hyperparameters for one reward-model fit."""

    hidden_sizes: tuple[int, ...] = (128, 128)
    """Units per tanh hidden layer."""

    learning_rate: float = 5e-4
    """Adam step size."""

    dropout: float = 0.5
    """Drop probability after each hidden layer during training only."""

    l2: float = 0.0
    """Coefficient of the squared-norm penalty on hidden-layer weights."""

    patience: int = 20
    """Stop after this many epochs without a validation improvement."""

    max_epochs: int = 1000
    """Hard cap on training epochs."""

    batch_size: int = 256
    """Mini-batch size."""

    validation_fraction: float = 0.2
    """Share of records held out for early stopping."""

    def __post_init__(self) -> None:
        if not self.hidden_sizes or any(h < 1 for h in self.hidden_sizes):
            raise InvalidInputError(f"hidden_sizes must be positive, got {self.hidden_sizes}")
        if not self.learning_rate > 0.0:
            raise InvalidInputError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0.0 <= self.dropout < 1.0:
            raise InvalidInputError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.l2 < 0.0:
            raise InvalidInputError(f"l2 must be >= 0, got {self.l2}")
        if self.patience < 1 or self.max_epochs < 1 or self.batch_size < 1:
            raise InvalidInputError("patience, max_epochs and batch_size must be >= 1")
        if not 0.0 < self.validation_fraction < 1.0:
            raise InvalidInputError(
                f"validation_fraction must be in (0, 1), got {self.validation_fraction}"
            )

    def with_overrides(self, **overrides: Any) -> RewardModelConfig:
        """Return a copy with the given fields replaced (``None`` values are ignored)."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["hidden_sizes"] = list(self.hidden_sizes)
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RewardModelConfig:
        values = dict(data)
        if "hidden_sizes" in values:
            values["hidden_sizes"] = tuple(int(h) for h in values["hidden_sizes"])
        return cls(**values)


def synthetic_reward_config() -> RewardModelConfig:
    """Preset for the synthetic domains: dropout 0.5, no weight penalty."""
    return RewardModelConfig(dropout=0.5, l2=0.0)


def warfarin_reward_config() -> RewardModelConfig:
    """Preset for the Warfarin domain: no dropout, L2 coefficient 0.1."""
    return RewardModelConfig(dropout=0.0, l2=1e-1)
