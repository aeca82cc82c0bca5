"""Target and behavior policies, and logged datasets."""

from kmis.policies.behavior import (
    BehaviorPolicy,
    IsotropicGaussianBehavior,
    TruncatedNormalUniformBehavior,
    UniformBoxBehavior,
    density,
    density_bin_mass,
)
from kmis.policies.dataset import (
    LoggedDataset,
    generate_dataset,
    load_dataset_csv,
    save_dataset_csv,
)
from kmis.policies.target import TargetPolicy

__all__ = [
    "BehaviorPolicy",
    "IsotropicGaussianBehavior",
    "LoggedDataset",
    "TargetPolicy",
    "TruncatedNormalUniformBehavior",
    "UniformBoxBehavior",
    "density",
    "density_bin_mass",
    "generate_dataset",
    "load_dataset_csv",
    "save_dataset_csv",
]
