"""Reward regression: the Gaussian-head network, its derivatives, and the DM baseline."""

from kmis.reward.config import RewardModelConfig, synthetic_reward_config, warfarin_reward_config
from kmis.reward.direct import dm_estimate
from kmis.reward.hessian import hessian_at, hessian_batch, mean_action_gradient
from kmis.reward.model import (
    FitReport,
    RewardModel,
    RewardRegressor,
    fit,
    load_reward_model,
    predict_mean,
    predict_second_moment,
    save_reward_model,
)
from kmis.reward.oracle import OracleRewardModel, constant_oracle
from kmis.reward.selection import GridSearchResult, grid_search

__all__ = [
    "FitReport",
    "GridSearchResult",
    "OracleRewardModel",
    "RewardModel",
    "RewardModelConfig",
    "RewardRegressor",
    "constant_oracle",
    "dm_estimate",
    "fit",
    "grid_search",
    "hessian_at",
    "hessian_batch",
    "load_reward_model",
    "mean_action_gradient",
    "predict_mean",
    "predict_second_moment",
    "save_reward_model",
    "synthetic_reward_config",
    "warfarin_reward_config",
]
