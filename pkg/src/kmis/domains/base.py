"""Common shape of an evaluation domain.

Dependencies: policies
Wired in: domains/synthetic.py, domains/warfarin.py, harness/runner.py, cli.py
"""

from __future__ import annotations

from abc import ABC, abstractmethod

from kmis.policies.behavior import BehaviorPolicy
from kmis.policies.dataset import LoggedDataset
from kmis.policies.target import TargetPolicy


class Domain(ABC):
    """A logging environment: behavior policy, target policy and data generator."""

    name: str
    behavior: BehaviorPolicy
    target: TargetPolicy

    @property
    def action_dim(self) -> int:
        return self.target.action_dim

    @property
    @abstractmethod
    def true_value(self) -> float:
        """Exact value of the target policy."""

    @abstractmethod
    def generate(self, n: int, seed: int) -> LoggedDataset:
        """Draw ``n`` logged records; identical seeds give identical datasets."""
