"""Build a domain from its name and options (config files and the CLI share this)."""

from __future__ import annotations

from enum import StrEnum
from pathlib import Path

from kmis.bandwidth.grid import BandwidthGrid, synthetic_grid, warfarin_grid
from kmis.domains.base import Domain
from kmis.domains.synthetic import make_abs_error, make_multimodal, make_quadratic
from kmis.domains.warfarin import TargetBmi, WarfarinDomain, warfarin_load
from kmis.errors import InvalidInputError
from kmis.reward.config import RewardModelConfig, synthetic_reward_config, warfarin_reward_config


class DomainName(StrEnum):
    QUADRATIC = "quadratic"
    ABS_ERROR = "abs_error"
    MULTIMODAL = "multimodal"
    WARFARIN = "warfarin"


def build_domain(
    name: DomainName | str,
    *,
    dummy_dims: int = 0,
    noise_sd: float = 0.5,
    warfarin_csv: Path | None = None,
    target_bmi: TargetBmi = "z",
) -> Domain:
    """Instantiate ``name``; options that do not apply to the domain are ignored."""
    match DomainName(name):
        case DomainName.QUADRATIC:
            return make_quadratic(noise_sd)
        case DomainName.ABS_ERROR:
            return make_abs_error(dummy_dims)
        case DomainName.MULTIMODAL:
            return make_multimodal()
        case DomainName.WARFARIN:
            if warfarin_csv is None:
                raise InvalidInputError("The warfarin domain needs a patient table CSV")
            return WarfarinDomain(warfarin_load(warfarin_csv), target_bmi=target_bmi)


def default_grid(name: DomainName | str) -> BandwidthGrid:
    return warfarin_grid() if DomainName(name) is DomainName.WARFARIN else synthetic_grid()


def default_reward_config(name: DomainName | str) -> RewardModelConfig:
    if DomainName(name) is DomainName.WARFARIN:
        return warfarin_reward_config()
    return synthetic_reward_config()
