"""Experiment tools: baselines, sweeps and training runs."""

from pathlib import Path
from typing import Annotated, Literal, Optional

import anyio
from fastmcp import Context, FastMCP
from fastmcp.exceptions import ToolError
from pydantic import Field

from ..config import ExperimentConfig
from ..harness.evaluation import MetricRow, evaluate_policy
from ..harness.experiments import run_sweep as sweep
from ..harness.strategies import strategy_eval
from ..rl.trainer import train
from ..utils.error_mapper import create_error_response, map_error

experiments_router = FastMCP(
    name="ExperimentTools",
    instructions="Static baselines, parameter sweeps and PPO-BOP training",
)


def get_context(ctx: Context):
    """Helper to retrieve app context from lifespan."""
    return ctx.request_context.lifespan_context


def _tool_error(e: Exception) -> ToolError:
    error_code, message = map_error(e)
    return ToolError(str(create_error_response(error_code, message).to_dict()))


def _config(
    scenario: Optional[dict], trainer: Optional[dict], ablation: Optional[dict] = None
) -> ExperimentConfig:
    return ExperimentConfig().with_updates(scenario=scenario, trainer=trainer, ablation=ablation)


@experiments_router.tool(
    description="Evaluate a static strategy (1: no SIM, 2: phases pi + half power, "
    "3: phases pi + full power) and return its mean ASR",
    tags={"experiments", "baseline"},
)
async def run_baseline(
    strategy: Annotated[Literal[1, 2, 3], Field(description="Static strategy id")],
    episodes: Annotated[int, Field(description="Evaluation episodes", ge=1)] = 20,
    seed: Annotated[int, Field(description="Channel/mobility seed", ge=0)] = 0,
    scenario: Annotated[
        Optional[dict], Field(description="Scenario overrides, e.g. {'max_power_dbm': 20}")
    ] = None,
) -> dict:
    """
    Run a static baseline synchronously (it needs no training).

    Returns:
        The metric row: mean/std ASR, mean reward, episodes and seeds
    """
    try:
        config = _config(scenario, None)
        row = await anyio.to_thread.run_sync(
            lambda: strategy_eval(strategy, config.scenario, episodes, seed)
        )
        return {"success": True, **row.to_record()}
    except Exception as e:
        raise _tool_error(e)


@experiments_router.tool(
    description="Start a background parameter sweep; poll the returned run_id with get_run",
    tags={"experiments", "sweep"},
)
async def run_sweep(
    ctx: Context,
    axis: Annotated[
        Literal["pmax", "kappa", "m", "n", "lr", "batch", "depth"],
        Field(description="Swept parameter"),
    ],
    values: Annotated[list[float], Field(description="Values of the swept parameter")],
    method: Annotated[
        Literal["strategy1", "strategy2", "strategy3", "random_search", "ppo_bop"],
        Field(description="Method evaluated at every point"),
    ] = "strategy2",
    episodes: Annotated[int, Field(description="Evaluation episodes per seed", ge=1)] = 20,
    seeds: Annotated[list[int], Field(description="Shared seed set")] = [0],
    scenario: Annotated[Optional[dict], Field(description="Scenario overrides")] = None,
    trainer: Annotated[Optional[dict], Field(description="Trainer overrides")] = None,
) -> dict:
    """
    Submit a sweep as a run.

    Returns:
        run_id and status of the submitted run
    """
    try:
        app_ctx = get_context(ctx)
        config = _config(scenario, trainer)
        out_dir = app_ctx.settings.output_path / "sweeps"

        def job(run_id: str) -> dict:
            table = sweep(
                axis,
                values,
                config,
                method=method,
                episodes=episodes,
                seeds=seeds,
                out_dir=out_dir / run_id if method == "ppo_bop" else None,
                workers=app_ctx.settings.sweep_workers,
            )
            return {"rows": table.to_records()}

        run = await app_ctx.run_manager.submit(
            "sweep", job, {"axis": axis, "values": values, "method": method, "seeds": seeds}
        )
        await ctx.info(f"Submitted sweep {run.run_id} over {axis}")
        return {"success": True, "run_id": run.run_id, "status": run.status}
    except Exception as e:
        raise _tool_error(e)


@experiments_router.tool(
    description="Start a background PPO-BOP training run; poll the returned run_id with get_run",
    tags={"experiments", "training"},
)
async def start_training(
    ctx: Context,
    episodes: Annotated[int, Field(description="Training episodes after warm-up", ge=0)] = 500,
    seed: Annotated[int, Field(description="Training seed", ge=0)] = 0,
    scenario: Annotated[Optional[dict], Field(description="Scenario overrides")] = None,
    trainer: Annotated[Optional[dict], Field(description="Trainer overrides")] = None,
    ablation: Annotated[
        Optional[dict], Field(description="Ablation flags, e.g. {'disable_opdu': true}")
    ] = None,
) -> dict:
    """
    Submit a training run. Metrics and checkpoints go to <output_dir>/<run_id>.

    Returns:
        run_id and status of the submitted run
    """
    try:
        app_ctx = get_context(ctx)
        overrides = {**(trainer or {}), "episodes": episodes, "seed": seed}
        config = _config(scenario, overrides, ablation)

        def job(run_id: str) -> dict:
            out = Path(app_ctx.settings.output_path) / run_id
            result = train(config, out_dir=out)
            scores = evaluate_policy(
                result.network,
                config.scenario,
                config.trainer.history_length,
                config.trainer.eval_episodes,
                seed,
            )
            row = MetricRow.from_scores(scores, run_id, "ppo_bop", [seed])
            return {
                "evaluation": row.to_record(),
                "converged_episode": result.converged_episode,
                "alpha": result.alpha,
                "checkpoints": [str(p) for p in result.checkpoints],
                "output_dir": str(out),
            }

        run = await app_ctx.run_manager.submit(
            "training", job, {"episodes": episodes, "seed": seed, "ablation": config.ablation.label}
        )
        await ctx.info(f"Submitted training run {run.run_id}")
        return {"success": True, "run_id": run.run_id, "status": run.status}
    except Exception as e:
        raise _tool_error(e)


@experiments_router.tool(
    description="Get status and results of a submitted run",
    tags={"experiments", "runs"},
)
async def get_run(
    ctx: Context,
    run_id: Annotated[str, Field(description="Run ID returned by run_sweep or start_training")],
) -> dict:
    try:
        app_ctx = get_context(ctx)
        return {"success": True, **app_ctx.run_manager.get_run(run_id).to_dict()}
    except Exception as e:
        raise _tool_error(e)
