"""
Sweeps, ablations and method comparisons.

Every point is evaluated under the same seed set, so rows differ only in the swept
quantity. Points are independent; with more than one worker they run in separate
processes and the table is assembled in input order.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import TYPE_CHECKING, Optional, Sequence

import anyio
import anyio.to_process

from ..core.exceptions import InvalidSweepAxisError, UnknownStrategyError
from ..rl.trainer import train
from .evaluation import EpisodeScores, MetricRow, MetricTable, evaluate_policy
from .strategies import random_search_scores, strategy_scores

if TYPE_CHECKING:
    from ..config import ExperimentConfig

logger = logging.getLogger(__name__)

# axis -> (config block, field, type)
SWEEP_AXES: dict[str, tuple[str, str, type]] = {
    "pmax": ("scenario", "max_power_dbm", float),
    "kappa": ("scenario", "rhi_level", float),
    "m": ("scenario", "layers", int),
    "n": ("scenario", "atoms_per_layer", int),
    "lr": ("trainer", "learning_rate", float),
    "batch": ("trainer", "batch_size", int),
    "depth": ("trainer", "lstm_layers", int),
}

METHODS = ("strategy1", "strategy2", "strategy3", "random_search", "ppo_bop")

DEFAULT_ABLATIONS: tuple[dict, ...] = (
    {},
    {"disable_bilstm": True},
    {"disable_opdu": True},
    {"disable_pf": True},
    {"disable_mhsa": True},
)


def parse_values(axis: str, values: str | Sequence) -> list:
    """
    Split "10,20,30" (or take a list) and coerce to the axis type.

    Raises:
        InvalidSweepAxisError: If the axis is unknown
        ValueError: If no values are given or a value has the wrong type
    """
    if axis not in SWEEP_AXES:
        raise InvalidSweepAxisError(axis, sorted(SWEEP_AXES))
    if isinstance(values, str):
        values = [v for v in (part.strip() for part in values.split(",")) if v]
    if not values:
        raise ValueError(f"Sweep over '{axis}' needs at least one value")

    kind = SWEEP_AXES[axis][2]
    parsed = []
    for value in values:
        number = float(value)
        if kind is int:
            if not number.is_integer():
                raise ValueError(f"Axis '{axis}' takes integers, got {value}")
            parsed.append(int(number))
        else:
            parsed.append(number)
    return parsed


def apply_axis(config: "ExperimentConfig", axis: str, value) -> "ExperimentConfig":
    if axis not in SWEEP_AXES:
        raise InvalidSweepAxisError(axis, sorted(SWEEP_AXES))
    block, name, _ = SWEEP_AXES[axis]
    return config.with_updates(**{block: {name: value}})


def method_scores(
    method: str,
    config: "ExperimentConfig",
    episodes: int,
    seed: int,
    out_dir: Optional[Path] = None,
) -> EpisodeScores:
    """
    Evaluation scores of one method for one seed.

    ppo_bop trains with `seed` first, then evaluates greedily on the same channel
    stream the static strategies see.

    Raises:
        UnknownStrategyError: If the method is not one of METHODS
    """
    scenario = config.scenario
    if method.startswith("strategy"):
        return strategy_scores(method, scenario, episodes, seed)
    if method == "random_search":
        return random_search_scores(scenario, episodes, seed)
    if method == "ppo_bop":
        seeded = config.with_updates(trainer={"seed": seed})
        run_dir = out_dir / f"seed_{seed}" if out_dir is not None else None
        result = train(seeded, out_dir=run_dir)
        return evaluate_policy(
            result.network, scenario, seeded.trainer.history_length, episodes, seed
        )
    raise UnknownStrategyError(method)


def evaluate_point(
    method: str,
    config: "ExperimentConfig",
    episodes: int,
    seeds: Sequence[int],
    run_id: str,
    axis: str = "",
    value="",
    out_dir: Optional[Path] = None,
) -> MetricRow:
    scores = EpisodeScores()
    for seed in seeds:
        scores.extend(method_scores(method, config, episodes, seed, out_dir))
    row = MetricRow.from_scores(scores, run_id, method, seeds, axis=axis, value=value)
    logger.info(f"{run_id} [{method}]: ASR {row.mean_asr:.3f} +/- {row.std_asr:.3f}")
    return row


def _evaluate_point_job(job: dict) -> dict:
    """Process-pool entry point; arguments and result cross the boundary as plain data."""
    from ..config import ExperimentConfig

    row = evaluate_point(
        job["method"],
        ExperimentConfig.model_validate_json(job["config"]),
        job["episodes"],
        job["seeds"],
        job["run_id"],
        job["axis"],
        job["value"],
        Path(job["out_dir"]) if job["out_dir"] else None,
    )
    return {**row.to_record(), "seeds": list(row.seeds)}


async def _run_jobs(jobs: list[dict], workers: int) -> list[dict]:
    limiter = anyio.CapacityLimiter(workers)
    results: list[Optional[dict]] = [None] * len(jobs)

    async def run_one(index: int, job: dict) -> None:
        results[index] = await anyio.to_process.run_sync(
            _evaluate_point_job, job, limiter=limiter
        )

    async with anyio.create_task_group() as tg:
        for index, job in enumerate(jobs):
            tg.start_soon(run_one, index, job)
    return results


def run_jobs(jobs: list[dict], workers: int = 1) -> MetricTable:
    if workers > 1 and len(jobs) > 1:
        logger.info(f"Evaluating {len(jobs)} points on {workers} worker processes")
        records = anyio.run(_run_jobs, jobs, workers)
    else:
        records = [_evaluate_point_job(job) for job in jobs]
    rows = [MetricRow(**{**r, "seeds": tuple(r["seeds"])}) for r in records]
    return MetricTable(rows)


def _job(
    method: str,
    config: "ExperimentConfig",
    episodes: int,
    seeds: Sequence[int],
    run_id: str,
    axis: str,
    value,
    out_dir: Optional[Path],
) -> dict:
    return {
        "method": method,
        "config": config.model_dump_json(),
        "episodes": episodes,
        "seeds": [int(s) for s in seeds],
        "run_id": run_id,
        "axis": axis,
        "value": str(value),
        "out_dir": str(out_dir / run_id) if out_dir is not None else None,
    }


def _check_method(method: str) -> None:
    if method not in METHODS:
        raise UnknownStrategyError(method)


def run_sweep(
    axis: str,
    values: str | Sequence,
    config: "ExperimentConfig",
    method: str = "strategy2",
    episodes: int = 20,
    seeds: Sequence[int] = (0,),
    out_dir: Optional[Path] = None,
    workers: int = 1,
) -> MetricTable:
    """
    One row per value of `axis`, each evaluated with `method` under the shared seeds.

    Raises:
        InvalidSweepAxisError: If the axis is unknown
        UnknownStrategyError: If the method is unknown
        ValueError: If the value list is empty or malformed
    """
    _check_method(method)
    parsed = parse_values(axis, values)
    jobs = [
        _job(
            method,
            apply_axis(config, axis, value),
            episodes,
            seeds,
            f"{axis}={value}",
            axis,
            value,
            out_dir,
        )
        for value in parsed
    ]
    logger.info(f"Sweeping {axis} over {parsed} with {method}")
    return run_jobs(jobs, workers)


def ablation_configs(
    config: "ExperimentConfig", combos: Optional[Sequence[dict]] = None
) -> list["ExperimentConfig"]:
    """
    One config per requested flag combination, applied over an all-enabled base.

    Combinations with the same label collapse to one; the default set is the full
    method followed by each mechanism disabled in turn.
    """
    base = config.with_updates(ablation=dict.fromkeys(type(config.ablation).model_fields, False))
    variants: dict[str, "ExperimentConfig"] = {}
    for combo in DEFAULT_ABLATIONS if combos is None else combos:
        variant = base.with_updates(ablation=dict(combo))
        variants.setdefault(variant.ablation.label, variant)
    return list(variants.values())


def run_ablation(
    config: "ExperimentConfig",
    combos: Optional[Sequence[dict]] = None,
    episodes: int = 20,
    seeds: Sequence[int] = (0,),
    out_dir: Optional[Path] = None,
    workers: int = 1,
) -> MetricTable:
    """Train and evaluate PPO-BOP once per ablation, all on the same seeds."""
    variants = ablation_configs(config, combos)
    jobs = [
        _job(
            "ppo_bop",
            variant,
            episodes,
            seeds,
            variant.ablation.label,
            "ablation",
            variant.ablation.label,
            out_dir,
        )
        for variant in variants
    ]
    logger.info(f"Ablation over {[v.ablation.label for v in variants]}")
    return run_jobs(jobs, workers)


def compare(
    config: "ExperimentConfig",
    methods: Sequence[str] = METHODS,
    episodes: int = 20,
    seeds: Sequence[int] = (0,),
    out_dir: Optional[Path] = None,
    workers: int = 1,
) -> MetricTable:
    """One row per method on identical channel streams."""
    for method in methods:
        _check_method(method)
    jobs = [
        _job(method, config, episodes, seeds, method, "method", method, out_dir)
        for method in methods
    ]
    return run_jobs(jobs, workers)
