"""End-to-end reference workflows driven through the public RPC clients."""

from .crossview import CrossViewConfig, CrossViewReport, run_crossview
from .dataset_run import DatasetRunConfig, DatasetRunReport, run_dataset
from .landing import LandingConfig, LandingReport, run_landing
from .rl_env import OBS_DIM, RlEnv, RlEnvConfig

__all__ = [
    "CrossViewConfig",
    "CrossViewReport",
    "run_crossview",
    "DatasetRunConfig",
    "DatasetRunReport",
    "run_dataset",
    "LandingConfig",
    "LandingReport",
    "run_landing",
    "OBS_DIM",
    "RlEnv",
    "RlEnvConfig",
]
