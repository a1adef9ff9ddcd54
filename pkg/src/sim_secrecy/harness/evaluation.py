"""Metric tables and greedy evaluation of trained policies."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterator, Optional, Sequence

import numpy as np

from ..core.env import SecureUplinkEnv, StateWindow
from ..core.exceptions import CheckpointError
from ..rl.checkpoint import load_checkpoint, read_checkpoint
from ..rl.network import ActorCritic
from ..utils.io import write_csv, write_jsonl

if TYPE_CHECKING:
    from ..config import ExperimentConfig, ScenarioConfig

logger = logging.getLogger(__name__)

COLUMNS = (
    "run_id",
    "method",
    "axis",
    "value",
    "mean_asr",
    "std_asr",
    "mean_reward",
    "episodes",
    "seeds",
)


@dataclass
class EpisodeScores:
    """Per-episode time-averaged sum secrecy rate and mean reward."""

    asr: list[float] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)
    trace: list[dict] = field(default_factory=list)

    def add(self, secrecy_sums: Sequence[float], rewards: Sequence[float]) -> None:
        self.asr.append(float(np.mean(secrecy_sums)))
        self.rewards.append(float(np.mean(rewards)))

    def extend(self, other: "EpisodeScores") -> None:
        self.asr.extend(other.asr)
        self.rewards.extend(other.rewards)
        self.trace.extend(other.trace)


@dataclass
class MetricRow:
    run_id: str
    method: str
    axis: str
    value: str
    mean_asr: float
    std_asr: float
    mean_reward: float
    episodes: int
    seeds: tuple[int, ...]

    @classmethod
    def from_scores(
        cls,
        scores: EpisodeScores,
        run_id: str,
        method: str,
        seeds: Sequence[int],
        axis: str = "",
        value="",
    ) -> "MetricRow":
        return cls(
            run_id=run_id,
            method=method,
            axis=axis,
            value=str(value),
            mean_asr=float(np.mean(scores.asr)),
            std_asr=float(np.std(scores.asr)),
            mean_reward=float(np.mean(scores.rewards)),
            episodes=len(scores.asr),
            seeds=tuple(int(s) for s in seeds),
        )

    def to_record(self) -> dict:
        record = asdict(self)
        record["seeds"] = ";".join(str(s) for s in self.seeds)
        return record


class MetricTable:
    """Ordered rows with a fixed CSV schema (COLUMNS)."""

    def __init__(self, rows: Optional[Sequence[MetricRow]] = None):
        self.rows: list[MetricRow] = list(rows or [])

    def append(self, row: MetricRow) -> None:
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[MetricRow]:
        return iter(self.rows)

    def to_records(self) -> list[dict]:
        return [row.to_record() for row in self.rows]

    def to_csv(self, path: Path | str) -> Path:
        return write_csv(path, COLUMNS, self.to_records())


def evaluate_policy(
    network: ActorCritic,
    scenario: "ScenarioConfig",
    history_length: int,
    episodes: int,
    seed: int,
    record_trace: bool = False,
) -> EpisodeScores:
    """
    Greedy rollouts (mean action, no sampling) on a fresh environment seeded with `seed`.

    Static strategies evaluated with the same seed see identical channel sequences.
    """
    env = SecureUplinkEnv(scenario, seed=seed)
    env.record_trace = record_trace
    scores = EpisodeScores()
    rng = np.random.default_rng(seed)

    for episode in range(episodes):
        window = StateWindow(history_length)
        current = window.reset(env.scaler(env.reset()))
        sums, rewards = [], []
        done = False
        while not done:
            action, _, _ = network.act(current, rng, deterministic=True)
            result = env.step(action)
            current = window.push(env.scaler(result.state))
            sums.append(result.report.sum_secrecy)
            rewards.append(result.reward)
            done = result.done
        scores.add(sums, rewards)
        if record_trace:
            scores.trace.extend({"episode": episode, **record} for record in env.trace)

    logger.info(
        f"Greedy evaluation over {episodes} episodes: ASR {np.mean(scores.asr):.3f} "
        f"+/- {np.std(scores.asr):.3f}"
    )
    return scores


def load_policy(
    checkpoint: Path | str, config: Optional["ExperimentConfig"] = None
) -> tuple[ActorCritic, "ExperimentConfig"]:
    """
    Rebuild a network from a checkpoint.

    Without an explicit config, the experiment config stored in the checkpoint is used.

    Raises:
        CheckpointError: If the file is invalid or does not match the network
    """
    from ..config import ExperimentConfig

    if config is None:
        _, meta = read_checkpoint(checkpoint)
        if "config" not in meta:
            raise CheckpointError(str(checkpoint), "no experiment config stored")
        config = ExperimentConfig.model_validate(meta["config"])
    scenario = config.scenario
    network = ActorCritic(
        scenario.state_dim,
        scenario.action_dim,
        config.trainer,
        config.ablation,
        np.random.default_rng(config.trainer.seed),
    )
    load_checkpoint(checkpoint, network.store)
    return network, config


def export_trace(path: Path | str, scores: EpisodeScores) -> Path:
    return write_jsonl(path, scores.trace)
