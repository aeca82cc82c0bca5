"""Hyperparameter grid search for the reward regressor.

Every candidate is fitted with the same seed, hence the same validation split,
and the candidate with the lowest best validation NLL wins (first one on ties).

Dependencies: reward.config, reward.model
Wired in: cli.py → fit-reward --l2-grid / --learning-rate-grid
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Final, Literal

from kmis.errors import InvalidInputError
from kmis.policies.dataset import LoggedDataset
from kmis.reward.config import RewardModelConfig
from kmis.reward.model import FitReport, RewardModel, fit

_log = logging.getLogger(__name__)

DEFAULT_L2_GRID: Final[tuple[float, ...]] = (1e-5, 1e-4, 1e-3, 1e-2, 1e-1)
DEFAULT_LEARNING_RATE_GRID: Final[tuple[float, ...]] = (1e-4, 5e-4, 1e-3)

SearchParameter = Literal["l2", "learning_rate"]


@dataclass(frozen=True)
class GridSearchResult:
    parameter: SearchParameter
    chosen: float
    model: RewardModel
    report: FitReport
    candidates: tuple[tuple[float, FitReport], ...]


def grid_search(
    data: LoggedDataset,
    parameter: SearchParameter,
    values: Sequence[float] | None = None,
    base: RewardModelConfig | None = None,
    seed: int = 0,
) -> GridSearchResult:
    """Fit one model per grid value of ``parameter`` and keep the best."""
    base = base or RewardModelConfig()
    if values is None:
        values = DEFAULT_L2_GRID if parameter == "l2" else DEFAULT_LEARNING_RATE_GRID
    if not values:
        raise InvalidInputError(f"Empty {parameter} grid")

    fits: list[tuple[float, RewardModel, FitReport]] = []
    for value in values:
        model, report = fit(data, base.with_overrides(**{parameter: float(value)}), seed)
        fits.append((float(value), model, report))
        _log.info("%s=%g: best validation NLL %.4f", parameter, value, report.best_validation_nll)

    chosen, model, report = min(fits, key=lambda item: item[2].best_validation_nll)
    candidates = [(value, item_report) for value, _, item_report in fits]
    _log.info("Selected %s=%g", parameter, chosen)
    return GridSearchResult(
        parameter=parameter,
        chosen=chosen,
        model=model,
        report=report,
        candidates=tuple(candidates),
    )
