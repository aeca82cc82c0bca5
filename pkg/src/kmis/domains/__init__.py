"""Evaluation domains: synthetic environments with exact values and Warfarin-style dosing."""

from kmis.domains.base import Domain
from kmis.domains.registry import DomainName, build_domain, default_grid, default_reward_config
from kmis.domains.synthetic import (
    SyntheticDomain,
    make_abs_error,
    make_multimodal,
    make_quadratic,
    monte_carlo_value,
    true_value_mc,
)
from kmis.domains.warfarin import (
    WarfarinDomain,
    WarfarinTable,
    warfarin_load,
    warfarin_make_logged,
    warfarin_synthetic,
)

__all__ = [
    "Domain",
    "DomainName",
    "SyntheticDomain",
    "WarfarinDomain",
    "WarfarinTable",
    "build_domain",
    "default_grid",
    "default_reward_config",
    "make_abs_error",
    "make_multimodal",
    "make_quadratic",
    "monte_carlo_value",
    "true_value_mc",
    "warfarin_load",
    "warfarin_make_logged",
    "warfarin_synthetic",
]
