"""Physics, mobility, metrics and the MDP environment."""

from .exceptions import (
    SimSecrecyError,
    GeometryError,
    LayerIndexError,
    DimensionMismatchError,
    ConfigError,
    NumericDivergenceError,
)
from .run_manager import RunManager, RunSweeper, ExperimentRun

__all__ = [
    "SimSecrecyError",
    "GeometryError",
    "LayerIndexError",
    "DimensionMismatchError",
    "ConfigError",
    "NumericDivergenceError",
    "RunManager",
    "ExperimentRun",
    "RunSweeper",
]
