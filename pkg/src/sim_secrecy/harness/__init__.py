"""Baselines, evaluation, sweeps, ablations and the command line."""

from .evaluation import COLUMNS, MetricRow, MetricTable, evaluate_policy, load_policy
from .experiments import METHODS, SWEEP_AXES, compare, run_ablation, run_sweep
from .strategies import STRATEGIES, strategy_eval

__all__ = [
    "COLUMNS",
    "MetricRow",
    "MetricTable",
    "evaluate_policy",
    "load_policy",
    "METHODS",
    "SWEEP_AXES",
    "compare",
    "run_ablation",
    "run_sweep",
    "STRATEGIES",
    "strategy_eval",
]
