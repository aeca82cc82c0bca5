"""Direct-method report wrapper."""

from __future__ import annotations

from kmis.estimators.report import EstimatorKind, EstimatorReport
from kmis.policies.dataset import LoggedDataset
from kmis.policies.target import TargetPolicy
from kmis.reward.direct import dm_estimate
from kmis.reward.model import RewardRegressor


def dm_report(model: RewardRegressor, data: LoggedDataset, target: TargetPolicy) -> EstimatorReport:
    return EstimatorReport(
        estimator=EstimatorKind.DM,
        estimate=dm_estimate(model, data.states, target),
        n_used=data.n,
    )
