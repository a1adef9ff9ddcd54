"""Command-line interface: train, evaluate, sweep, ablate, baseline, compare, serve."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from ..config import ExperimentConfig, configure_logging, load_experiment_config, settings
from ..rl.trainer import train
from ..utils.error_mapper import exit_code_for, map_error
from ..utils.io import write_jsonl
from .evaluation import MetricRow, MetricTable, evaluate_policy, export_trace, load_policy
from .experiments import METHODS, SWEEP_AXES, compare, run_ablation, run_sweep
from .strategies import strategy_eval

logger = logging.getLogger(__name__)


def _seeds(args: argparse.Namespace, config: ExperimentConfig) -> list[int]:
    if getattr(args, "seeds", None):
        return [int(s) for s in args.seeds.split(",") if s.strip()]
    return [config.trainer.seed]


def _load(args: argparse.Namespace) -> ExperimentConfig:
    config = load_experiment_config(args.config)
    if args.seed is not None:
        config = config.with_updates(trainer={"seed": args.seed})
    return config


def _write_table(table: MetricTable, out: Path, name: str) -> Path:
    path = table.to_csv(out / f"{name}.csv")
    write_jsonl(out / f"{name}.jsonl", table.to_records())
    print(path)
    return path


def _parse_combo(text: str) -> dict:
    """'opdu+pf' -> {'disable_opdu': True, 'disable_pf': True}; 'full' -> {}."""
    if text.strip().lower() == "full":
        return {}
    return {f"disable_{part.strip().lower()}": True for part in text.split("+") if part.strip()}


def cmd_train(args: argparse.Namespace, config: ExperimentConfig, out: Path) -> None:
    if args.episodes is not None:
        config = config.with_updates(trainer={"episodes": args.episodes})
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(config.to_json())

    result = train(config, out_dir=out)
    seed = config.trainer.seed
    scores = evaluate_policy(
        result.network,
        config.scenario,
        config.trainer.history_length,
        config.trainer.eval_episodes,
        seed,
    )
    row = MetricRow.from_scores(scores, config.ablation.label, "ppo_bop", [seed])
    _write_table(MetricTable([row]), out, "train")


def cmd_evaluate(args: argparse.Namespace, config: Optional[ExperimentConfig], out: Path) -> None:
    network, config = load_policy(args.checkpoint, config)
    seed = args.seed if args.seed is not None else config.trainer.seed
    episodes = args.episodes or config.trainer.eval_episodes
    scores = evaluate_policy(
        network,
        config.scenario,
        config.trainer.history_length,
        episodes,
        seed,
        record_trace=True,
    )
    export_trace(out / "trace.jsonl", scores)
    row = MetricRow.from_scores(scores, Path(args.checkpoint).stem, "ppo_bop", [seed])
    _write_table(MetricTable([row]), out, "evaluate")


def cmd_sweep(args: argparse.Namespace, config: ExperimentConfig, out: Path) -> None:
    table = run_sweep(
        args.axis,
        args.values,
        config,
        method=args.method,
        episodes=args.episodes or 20,
        seeds=_seeds(args, config),
        out_dir=out / "runs" if args.method == "ppo_bop" else None,
        workers=args.workers or settings.sweep_workers,
    )
    _write_table(table, out, f"sweep_{args.axis}")


def cmd_ablate(args: argparse.Namespace, config: ExperimentConfig, out: Path) -> None:
    combos = [_parse_combo(c) for c in args.combo] if args.combo else None
    table = run_ablation(
        config,
        combos,
        episodes=args.episodes or 20,
        seeds=_seeds(args, config),
        out_dir=out / "runs",
        workers=args.workers or settings.sweep_workers,
    )
    _write_table(table, out, "ablation")


def cmd_baseline(args: argparse.Namespace, config: ExperimentConfig, out: Path) -> None:
    row = strategy_eval(
        args.strategy, config.scenario, args.episodes or 20, config.trainer.seed
    )
    _write_table(MetricTable([row]), out, f"baseline_{row.run_id}")


def cmd_compare(args: argparse.Namespace, config: ExperimentConfig, out: Path) -> None:
    methods = args.methods.split(",") if args.methods else METHODS
    table = compare(
        config,
        methods,
        episodes=args.episodes or 20,
        seeds=_seeds(args, config),
        out_dir=out / "runs",
        workers=args.workers or settings.sweep_workers,
    )
    _write_table(table, out, "compare")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sim-secrecy",
        description="SIM-assisted secure uplink simulator and PPO-BOP trainer",
    )
    parser.add_argument("--log-level", default=None, help="Override SIM_SECRECY_LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("--config", type=Path, default=None, help="Experiment config (JSON)")
        sub.add_argument("--seed", type=int, default=None, help="Seed override")
        sub.add_argument("--out", type=Path, default=None, help="Output directory")
        sub.add_argument("--episodes", type=int, default=None, help="Episode count")
        return sub

    add("train", "Train PPO-BOP and evaluate the final policy")

    evaluate = add("evaluate", "Greedy evaluation of a checkpoint, with trace export")
    evaluate.add_argument("--checkpoint", type=Path, required=True)

    sweep = add("sweep", "Sweep one parameter")
    sweep.add_argument("--axis", required=True, choices=sorted(SWEEP_AXES))
    sweep.add_argument("--values", required=True, help="Comma-separated values, e.g. 10,20,30")
    sweep.add_argument("--method", default="strategy2", choices=METHODS)
    sweep.add_argument("--seeds", default=None, help="Comma-separated seed set")
    sweep.add_argument("--workers", type=int, default=None)

    ablate = add("ablate", "Train PPO-BOP with mechanisms disabled")
    ablate.add_argument(
        "--combo",
        action="append",
        default=None,
        help="Flag combination such as 'full', 'opdu' or 'bilstm+opdu+pf'; repeatable",
    )
    ablate.add_argument("--seeds", default=None, help="Comma-separated seed set")
    ablate.add_argument("--workers", type=int, default=None)

    baseline = add("baseline", "Evaluate a static strategy")
    baseline.add_argument("--strategy", required=True, help="1, 2 or 3")

    comparison = add("compare", "One row per method on shared channel streams")
    comparison.add_argument("--methods", default=None, help=f"Subset of {','.join(METHODS)}")
    comparison.add_argument("--seeds", default=None, help="Comma-separated seed set")
    comparison.add_argument("--workers", type=int, default=None)

    commands.add_parser("serve", help="Run the MCP experiment server")
    return parser


COMMANDS = {
    "train": cmd_train,
    "sweep": cmd_sweep,
    "ablate": cmd_ablate,
    "baseline": cmd_baseline,
    "compare": cmd_compare,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand.

    Returns:
        0 on success, 2 for configuration errors, 3 for numeric divergence, 1 otherwise
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level or settings.log_level)

    if args.command == "serve":
        from ..server import run_server

        run_server()
        return 0

    try:
        out = args.out or settings.output_path
        if args.command == "evaluate":
            config = _load(args) if args.config else None
            cmd_evaluate(args, config, out)
        else:
            COMMANDS[args.command](args, _load(args), out)
        return 0
    except Exception as e:
        code, message = map_error(e)
        logger.debug("Command failed", exc_info=True)
        print(f"Error [{code.value}]: {message}", file=sys.stderr)
        return exit_code_for(e)
