"""
Static baselines and the random-search phase optimizer.

Strategy 1 drops the SIM (direct Rician channel to one antenna, full power),
Strategy 2 fixes every phase at pi with half power and Strategy 3 fixes every
phase at pi with full power.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Optional

import numpy as np

from ..core.em import PhaseConfig
from ..core.env import SecureUplinkEnv
from ..core.exceptions import UnknownStrategyError
from .evaluation import EpisodeScores, MetricRow

if TYPE_CHECKING:
    from ..config import ScenarioConfig

logger = logging.getLogger(__name__)

STRATEGIES = {
    1: "strategy1_no_sim",
    2: "strategy2_uniform_half_power",
    3: "strategy3_uniform_max_power",
}


def parse_strategy(strategy) -> int:
    """
    Accept 1, "2", "strategy3"...

    Raises:
        UnknownStrategyError: For anything else
    """
    text = str(strategy).strip().lower().removeprefix("strategy")
    try:
        value = int(text)
    except ValueError:
        raise UnknownStrategyError(strategy)
    if value not in STRATEGIES:
        raise UnknownStrategyError(strategy)
    return value


def strategy_configuration(
    strategy: int, scenario: "ScenarioConfig"
) -> tuple[Optional[PhaseConfig], np.ndarray]:
    """Fixed (phases, powers) a strategy applies in every slot."""
    strategy = parse_strategy(strategy)
    k, p_max = scenario.num_users, scenario.max_power_w
    if strategy == 1:
        return None, np.full(k, p_max)
    phases = PhaseConfig.uniform(scenario.layers, scenario.atoms_per_layer, np.pi)
    power = p_max / 2.0 if strategy == 2 else p_max
    return phases, np.full(k, power)


def strategy_env(strategy: int, scenario: "ScenarioConfig", seed: int) -> SecureUplinkEnv:
    return SecureUplinkEnv(scenario, seed=seed, use_sim=parse_strategy(strategy) != 1)


def run_static(
    env: SecureUplinkEnv,
    phases: Optional[PhaseConfig],
    powers: np.ndarray,
    episodes: int,
) -> EpisodeScores:
    scores = EpisodeScores()
    for _ in range(episodes):
        env.reset()
        sums, rewards = [], []
        done = False
        while not done:
            result = env.step_configuration(phases, powers)
            sums.append(result.report.sum_secrecy)
            rewards.append(result.reward)
            done = result.done
        scores.add(sums, rewards)
    return scores


def strategy_scores(
    strategy, scenario: "ScenarioConfig", episodes: int, seed: int
) -> EpisodeScores:
    strategy = parse_strategy(strategy)
    phases, powers = strategy_configuration(strategy, scenario)
    return run_static(strategy_env(strategy, scenario, seed), phases, powers, episodes)


def strategy_eval(
    strategy,
    scenario: "ScenarioConfig",
    episodes: int,
    seed: int,
    run_id: Optional[str] = None,
) -> MetricRow:
    """
    Mean ASR of a static strategy over `episodes` episodes.

    Raises:
        UnknownStrategyError: If the strategy id is not 1, 2 or 3
    """
    strategy = parse_strategy(strategy)
    scores = strategy_scores(strategy, scenario, episodes, seed)
    row = MetricRow.from_scores(
        scores, run_id or f"strategy{strategy}", STRATEGIES[strategy], [seed]
    )
    logger.info(f"Strategy {strategy}: ASR {row.mean_asr:.3f} +/- {row.std_asr:.3f}")
    return row


def random_search_scores(
    scenario: "ScenarioConfig", episodes: int, seed: int, candidates: int = 16
) -> EpisodeScores:
    """
    Per slot, keep the best of `candidates` uniformly random phase configurations
    (powers P_max) by sum secrecy rate.

    Candidates come from their own generator, so channel draws match the static
    strategies under the same seed.
    """
    env = SecureUplinkEnv(scenario, seed=seed)
    search_rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    powers = np.full(scenario.num_users, scenario.max_power_w)
    shape = (scenario.layers, scenario.atoms_per_layer)

    scores = EpisodeScores()
    for _ in range(episodes):
        env.reset()
        sums, rewards = [], []
        done = False
        while not done:
            options = [
                (PhaseConfig.wrapped(search_rng.uniform(0.0, 2.0 * np.pi, shape)), powers)
                for _ in range(candidates)
            ]
            result, _ = env.step_best_of(options)
            sums.append(result.report.sum_secrecy)
            rewards.append(result.reward)
            done = result.done
        scores.add(sums, rewards)
    return scores
