"""Warfarin-style dosing domain built from a preprocessed patient table.

Expected CSV schema::

    f_1,...,f_81,dose,bmi_z[,bmi]

``dose`` is the therapeutic dose ``a*``; ``bmi_z`` is the BMI z-score and the
last state feature. The optional raw ``bmi`` column only matters for the raw-BMI
target. Logged actions are ``a_1 ~ TN(mu* + sigma* sqrt(0.5) z_BMI,
(sigma* sqrt(0.5))^2)`` on ``[a*_min, a*_max]`` and ``a_2 ~ U[a*_min, a*_max]``;
the reward is ``-max(|a_1 - a*| - 0.1 a*, 0)``.

Dependencies: errors, policies, domains.base
Wired in: domains/registry.py, cli.py → warfarin-synth / generate
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property, partial
from pathlib import Path
from typing import Final, Literal

import numpy as np
import pandas as pd

from kmis.domains.base import Domain
from kmis.errors import DoseBoundsError, InvalidInputError, SchemaError
from kmis.numerics.types import FloatArray, IntArray
from kmis.policies.behavior import TruncatedNormalUniformBehavior
from kmis.policies.dataset import LoggedDataset
from kmis.policies.target import TargetPolicy

_log = logging.getLogger(__name__)

N_FEATURES: Final[int] = 81
DOSE_TOLERANCE: Final[float] = 0.1
BEHAVIOR_SD_FACTOR: Final[float] = math.sqrt(0.5)
WARFARIN_CLIP_FLOOR: Final[float] = 0.1
SYNTHETIC_DOSE_BOUNDS: Final[tuple[float, float]] = (5.0, 110.0)

TargetBmi = Literal["z", "raw"]


def feature_columns(n_features: int = N_FEATURES) -> list[str]:
    return [f"f_{i}" for i in range(1, n_features + 1)]


@dataclass(frozen=True, eq=False)
class WarfarinTable:
    """Validated patient table and the dose statistics derived from it."""

    features: FloatArray
    doses: FloatArray
    bmi_z: FloatArray
    bmi_raw: FloatArray | None
    dose_min: float
    dose_max: float
    dose_mean: float
    dose_sd: float

    @property
    def n_patients(self) -> int:
        return int(self.doses.shape[0])

    @property
    def states(self) -> FloatArray:
        """Patient features with the BMI z-score appended as the last column."""
        return np.column_stack([self.features, self.bmi_z])


def warfarin_reward(actions: FloatArray, doses: FloatArray) -> FloatArray:
    """Negative dosing cost; zero inside the 10% band around ``a*``."""
    return -np.maximum(np.abs(actions[:, 0] - doses) - DOSE_TOLERANCE * doses, 0.0)


def warfarin_load(
    path: Path,
    dose_bounds: tuple[float, float] | None = None,
    n_features: int = N_FEATURES,
) -> WarfarinTable:
    """Read and validate a preprocessed table.

    Bounds default to the observed dose range; explicit ``dose_bounds`` must
    contain every dose.

    Raises:
        SchemaError: A required column is missing.
        DoseBoundsError: Degenerate bounds or a dose outside them.
    """
    frame = pd.read_csv(path, float_precision="round_trip")
    for column in [*feature_columns(n_features), "dose", "bmi_z"]:
        if column not in frame.columns:
            raise SchemaError(column, str(path))
    doses = frame["dose"].to_numpy(dtype=np.float64)
    if doses.size == 0:
        raise InvalidInputError(f"{path}: table has no patients")
    lo, hi = dose_bounds if dose_bounds is not None else (float(doses.min()), float(doses.max()))
    if not lo < hi:
        raise DoseBoundsError(f"Dose bounds need a*_min < a*_max, got [{lo}, {hi}]")
    outside = np.flatnonzero((doses < lo) | (doses > hi))
    if outside.size:
        raise DoseBoundsError(
            f"{outside.size} doses outside [{lo}, {hi}], first at row {int(outside[0])}"
        )
    bmi_raw = frame["bmi"].to_numpy(dtype=np.float64) if "bmi" in frame.columns else None
    table = WarfarinTable(
        features=frame[feature_columns(n_features)].to_numpy(dtype=np.float64),
        doses=doses,
        bmi_z=frame["bmi_z"].to_numpy(dtype=np.float64),
        bmi_raw=bmi_raw,
        dose_min=lo,
        dose_max=hi,
        dose_mean=float(doses.mean()),
        dose_sd=float(doses.std()),
    )
    _log.info("Loaded %d Warfarin patients from %s", table.n_patients, path)
    return table


def _behavior_mean(states: FloatArray, mean: float, sd: float) -> FloatArray:
    return mean + sd * BEHAVIOR_SD_FACTOR * states[:, -1]


def _bmi_target(states: FloatArray, centre: float, scale: float) -> FloatArray:
    return np.column_stack([centre + scale * states[:, -1], np.zeros(states.shape[0])])


@dataclass(frozen=True, eq=False)
class WarfarinDomain(Domain):
    """Logged dosing decisions over (subsamples of) a patient table."""

    table: WarfarinTable
    target_bmi: TargetBmi = "z"
    name: str = "warfarin"

    @cached_property
    def behavior(self) -> TruncatedNormalUniformBehavior:  # type: ignore[override]
        table = self.table
        return TruncatedNormalUniformBehavior(
            mean_map=partial(_behavior_mean, mean=table.dose_mean, sd=table.dose_sd),
            sd=table.dose_sd * BEHAVIOR_SD_FACTOR,
            lo=table.dose_min,
            hi=table.dose_max,
            clip_floor=WARFARIN_CLIP_FLOOR,
        )

    @cached_property
    def target(self) -> TargetPolicy:  # type: ignore[override]
        """``pi(s) = (s_BMI, 0)`` with ``s_BMI`` the z-score or the reconstructed raw BMI."""
        centre, scale = 0.0, 1.0
        if self.target_bmi == "raw":
            raw = self.table.bmi_raw
            if raw is None:
                raise SchemaError("bmi", "warfarin table (needed for target_bmi='raw')")
            centre, scale = float(raw.mean()), float(raw.std())
        return TargetPolicy(
            name=f"bmi_{self.target_bmi}",
            action_dim=2,
            action_map=partial(_bmi_target, centre=centre, scale=scale),
        )

    @cached_property
    def true_value(self) -> float:  # type: ignore[override]
        """Exact mean reward of the target policy over the full table."""
        actions = self.target.act(self.table.states)
        return float(np.mean(warfarin_reward(actions, self.table.doses)))

    def _log_actions(self, patients: IntArray, rng: np.random.Generator) -> LoggedDataset:
        states = self.table.states[patients]
        actions = self.behavior.sample(states, rng)
        return LoggedDataset(
            states=states,
            actions=actions,
            rewards=warfarin_reward(actions, self.table.doses[patients]),
            behavior_density=self.behavior.density(states, actions),
        )

    def make_logged(self, seed: int) -> LoggedDataset:
        """Log one behavior action for every patient of the table."""
        rng = np.random.default_rng(seed)
        return self._log_actions(np.arange(self.table.n_patients), rng)

    def generate(self, n: int, seed: int) -> LoggedDataset:
        """Subsample ``n`` patients without replacement, then log actions."""
        if not 1 <= n <= self.table.n_patients:
            raise InvalidInputError(
                f"Sample size must be in [1, {self.table.n_patients}], got {n}"
            )
        rng = np.random.default_rng(seed)
        patients = np.sort(rng.choice(self.table.n_patients, size=n, replace=False))
        return self._log_actions(patients, rng)


def warfarin_make_logged(loaded: WarfarinTable, seed: int) -> LoggedDataset:
    """Logged dataset over every patient of ``loaded`` (z-score BMI target)."""
    return WarfarinDomain(loaded).make_logged(seed)


def warfarin_synthetic(n_patients: int, seed: int) -> pd.DataFrame:
    """A seed-stable table conforming to the Warfarin CSV schema.

    Features and BMI z-scores are standard normal; doses are lognormal around
    30 with a mild BMI and first-feature effect, clipped to ``[5, 110]``.
    """
    if n_patients < 1:
        raise InvalidInputError(f"n_patients must be >= 1, got {n_patients}")
    rng = np.random.default_rng(seed)
    features = rng.standard_normal((n_patients, N_FEATURES))
    bmi_z = rng.standard_normal(n_patients)
    log_dose = (
        math.log(30.0)
        + 0.1 * bmi_z
        + 0.15 * features[:, 0]
        + 0.35 * rng.standard_normal(n_patients)
    )
    doses = np.clip(np.exp(log_dose), *SYNTHETIC_DOSE_BOUNDS)
    frame = pd.DataFrame(features, columns=feature_columns())
    frame["dose"] = doses
    frame["bmi_z"] = bmi_z
    frame["bmi"] = 27.0 + 5.0 * bmi_z
    return frame
