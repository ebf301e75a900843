"""Python access to the amigo gridworlds, trainer and run artifacts."""

from ._amigo import (
    CHECKPOINT_VERSION,
    METRICS_SCHEMA,
    NUM_ACTIONS,
    ConfigError,
    Env,
    EnvError,
    IoError,
    code_version,
    evaluate,
    extrinsic_reward,
    load_config,
    read_checkpoint,
    reward_gaussian,
    reward_linexp,
    reward_threshold,
    train,
)
from .runs import Run, find_runs, read_metrics

__all__ = [
    "CHECKPOINT_VERSION",
    "METRICS_SCHEMA",
    "NUM_ACTIONS",
    "ConfigError",
    "Env",
    "EnvError",
    "IoError",
    "Run",
    "code_version",
    "evaluate",
    "extrinsic_reward",
    "find_runs",
    "load_config",
    "read_checkpoint",
    "read_metrics",
    "reward_gaussian",
    "reward_linexp",
    "reward_threshold",
    "train",
]
