"""Experiment configuration: a validated, frozen description of one sweep.

Loaded from YAML (JSON is accepted, being a YAML subset)::

    domain: {name: quadratic, noise_sd: 0.5}
    estimators:
      - {kind: kis, bandwidth: kallus}
      - {kind: kmis, bandwidth: kallus}
    sweep: {axis: sample_size, values: [2500, 10000, 40000]}
    n_trials: 20
    output: results/quadratic

Kernel estimators (``kis``, ``kmis``) take ``bandwidth: kallus | slope | <h>``;
a missing bandwidth means ``kallus``, except under a ``bandwidth`` sweep, where
the sweep value is the bandwidth and the field must stay empty.

Dependencies: bandwidth.grid, domains.registry, estimators.report, reward.config
Wired in: harness/runner.py, cli.py → run
"""

from __future__ import annotations

import logging
import os
from enum import StrEnum
from pathlib import Path
from typing import Annotated, Any, Final, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from kmis.bandwidth.grid import BandwidthGrid
from kmis.domains.registry import DomainName, default_grid, default_reward_config
from kmis.errors import InvalidInputError, KmisError
from kmis.estimators.report import EstimatorKind
from kmis.reward.config import RewardModelConfig
from kmis.reward.model import MIN_FIT_SAMPLES

_log = logging.getLogger(__name__)

DEFAULT_WORKERS_CAP: Final[int] = 4
KERNEL_KINDS: Final[frozenset[EstimatorKind]] = frozenset({EstimatorKind.KIS, EstimatorKind.KMIS})

PositiveFloat = Annotated[float, Field(gt=0.0)]


class BandwidthMode(StrEnum):
    KALLUS = "kallus"
    SLOPE = "slope"


class SweepAxis(StrEnum):
    SAMPLE_SIZE = "sample_size"
    BANDWIDTH = "bandwidth"
    DUMMY_DIMS = "dummy_dims"
    NOISE_SD = "noise_sd"


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class DomainSpec(_Frozen):
    """Which environment generates the logged data."""

    name: DomainName
    dummy_dims: int = Field(default=0, ge=0)
    noise_sd: float = Field(default=0.5, ge=0.0)
    warfarin_csv: Path | None = None
    target_bmi: Literal["z", "raw"] = "z"


class EstimatorSpec(_Frozen):
    """One estimator column of the comparison."""

    kind: EstimatorKind
    bandwidth: BandwidthMode | PositiveFloat | None = None
    self_normalize: bool = True
    bins_per_dim: int = Field(default=10, ge=1)

    @property
    def is_kernel(self) -> bool:
        return self.kind in KERNEL_KINDS

    def bandwidth_mode(self, axis: SweepAxis) -> BandwidthMode | float | None:
        """Bandwidth rule for this estimator; ``None`` means the sweep value or no kernel."""
        if not self.is_kernel or axis is SweepAxis.BANDWIDTH:
            return None
        return BandwidthMode.KALLUS if self.bandwidth is None else self.bandwidth

    def label(self, axis: SweepAxis) -> str:
        """Stable identifier used in records, summaries and tables."""
        parts = [self.kind.value]
        if self.is_kernel:
            mode = self.bandwidth_mode(axis)
            if mode is None:
                parts.append("sweep")
            elif isinstance(mode, BandwidthMode):
                parts.append(mode.value)
            else:
                parts.append(f"h{mode:g}")
        if self.kind is EstimatorKind.DISC:
            parts.append(f"b{self.bins_per_dim}")
        if self.kind is not EstimatorKind.DM and not self.self_normalize:
            parts.append("unnorm")
        return "-".join(parts)


class SweepSpec(_Frozen):
    axis: SweepAxis
    values: list[float] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_values(self) -> SweepSpec:
        for value in self.values:
            match self.axis:
                case SweepAxis.SAMPLE_SIZE | SweepAxis.DUMMY_DIMS if value != int(value):
                    raise ValueError(f"{self.axis} sweep values must be integers, got {value}")
                case SweepAxis.SAMPLE_SIZE if value < MIN_FIT_SAMPLES:
                    raise ValueError(f"sample sizes must be >= {MIN_FIT_SAMPLES}, got {value}")
                case SweepAxis.BANDWIDTH if not value > 0.0:
                    raise ValueError(f"bandwidths must be > 0, got {value}")
                case SweepAxis.DUMMY_DIMS | SweepAxis.NOISE_SD if value < 0.0:
                    raise ValueError(f"{self.axis} sweep values must be >= 0, got {value}")
                case _:
                    pass
        if len(set(self.values)) != len(self.values):
            raise ValueError("sweep values must be distinct")
        return self


class RewardOverrides(_Frozen):
    """Fields replacing the domain's reward-model preset; unset fields keep it."""

    hidden_sizes: tuple[int, ...] | None = None
    learning_rate: float | None = None
    dropout: float | None = None
    l2: float | None = None
    patience: int | None = None
    max_epochs: int | None = None
    batch_size: int | None = None
    validation_fraction: float | None = None

    def apply(self, base: RewardModelConfig) -> RewardModelConfig:
        return base.with_overrides(**self.model_dump())


class ExperimentConfig(_Frozen):
    """A full sweep: domain, estimators, sweep axis and trial protocol."""

    domain: DomainSpec
    estimators: list[EstimatorSpec] = Field(min_length=1)
    sweep: SweepSpec
    sample_size: int = Field(default=10_000, ge=MIN_FIT_SAMPLES)
    n_trials: int = Field(default=20, ge=1)
    base_seed: int = Field(default=0, ge=0)
    output: Path = Path("results")
    slope_grid: str | None = None
    epsilon_scale: float = Field(default=0.01, gt=0.0)
    reward: RewardOverrides = RewardOverrides()
    export_metrics: bool = True
    metrics_export_rows: int = Field(default=200, ge=1)

    @field_validator("slope_grid")
    @classmethod
    def _check_grid(cls, value: str | None) -> str | None:
        if value is not None:
            try:
                BandwidthGrid.parse(value)
            except KmisError as exc:
                raise ValueError(str(exc)) from exc
        return value

    @model_validator(mode="after")
    def _check_consistency(self) -> ExperimentConfig:
        axis = self.sweep.axis
        labels = [spec.label(axis) for spec in self.estimators]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise ValueError(f"estimators must be distinct, repeated: {', '.join(duplicates)}")
        if axis is SweepAxis.BANDWIDTH:
            fixed = [spec.label(axis) for spec in self.estimators if spec.bandwidth is not None]
            if fixed:
                raise ValueError(f"bandwidth sweep sets the bandwidth; remove it from {fixed}")
        if axis is SweepAxis.DUMMY_DIMS and self.domain.name is not DomainName.ABS_ERROR:
            raise ValueError("dummy_dims sweeps need the abs_error domain")
        if axis is SweepAxis.NOISE_SD and self.domain.name is not DomainName.QUADRATIC:
            raise ValueError("noise_sd sweeps need the quadratic domain")
        if self.domain.name is DomainName.WARFARIN and self.domain.warfarin_csv is None:
            raise ValueError("the warfarin domain needs domain.warfarin_csv")
        return self

    @property
    def labels(self) -> list[str]:
        return [spec.label(self.sweep.axis) for spec in self.estimators]

    def bandwidth_grid(self) -> BandwidthGrid:
        """Grid for SLOPE and the plug-in fallback."""
        if self.slope_grid is not None:
            return BandwidthGrid.parse(self.slope_grid)
        return default_grid(self.domain.name)

    def reward_config(self) -> RewardModelConfig:
        return self.reward.apply(default_reward_config(self.domain.name))

    def sample_size_for(self, sweep_value: float) -> int:
        if self.sweep.axis is SweepAxis.SAMPLE_SIZE:
            return int(sweep_value)
        return self.sample_size


def load_experiment_config(path: Path) -> ExperimentConfig:
    """Read and validate an experiment file.

    Raises:
        OSError: The file cannot be read.
        InvalidInputError: The file is not a YAML mapping.
        pydantic.ValidationError: A field is missing or invalid.
    """
    raw: Any = yaml.safe_load(path.read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise InvalidInputError(f"{path}: experiment config must be a mapping")
    config = ExperimentConfig.model_validate(raw)
    _log.info(
        "Loaded experiment %s: %s sweep over %d values, %d estimators, %d trials",
        path,
        config.sweep.axis,
        len(config.sweep.values),
        len(config.estimators),
        config.n_trials,
    )
    return config


def workers_from_env(default: int | None = None) -> int:
    """Trial thread count from ``KMIS_WORKERS``.

    Falls back to ``default`` or ``min(4, cpu_count)`` when the variable is unset.
    """
    raw = os.getenv("KMIS_WORKERS", "")
    if not raw.strip():
        return default or min(DEFAULT_WORKERS_CAP, os.cpu_count() or 1)
    try:
        value = int(raw)
    except ValueError:
        msg = f"KMIS_WORKERS must be an integer, got {raw!r}"
        raise ValueError(msg) from None
    if value <= 0:
        msg = f"KMIS_WORKERS must be positive, got {value}"
        raise ValueError(msg)
    return value
