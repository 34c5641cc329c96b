from .config import ConfigError, ExperimentSpec, LoadedConfig, load_config
from .csvio import ResultRow, read_csv, write_csv
from .experiments import run_experiment

__all__ = [
    "ConfigError",
    "ExperimentSpec",
    "LoadedConfig",
    "load_config",
    "ResultRow",
    "read_csv",
    "write_csv",
    "run_experiment",
]
