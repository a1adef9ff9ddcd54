"""
Reduced-scale trend checks for sweeps and learning.

These train and sweep for minutes; they are deselected by default. Run them with:

    pytest -m slow tests/integration
"""

import pytest

from sim_secrecy.config import ExperimentConfig
from sim_secrecy.harness.experiments import compare, run_sweep

pytestmark = pytest.mark.slow

SEEDS = (0, 1, 2)


@pytest.fixture
def reduced_config():
    """M = 2 layers of 16 atoms, 2 users, a mid-sized network."""
    return ExperimentConfig().with_updates(
        scenario={"layers": 2, "atoms_per_layer": 16, "num_users": 2},
        trainer={
            "hidden_size": 32,
            "attention_heads": 4,
            "lstm_layers": 2,
            "history_length": 4,
            "warmup_episodes": 20,
            "episodes": 200,
            "eval_episodes": 10,
            "checkpoint_every": 200,
        },
    )


def _asr(table) -> list[float]:
    return [row.mean_asr for row in table]


class TestSweepTrends:
    """Static-strategy sweeps under shared seeds."""

    def test_asr_increases_with_power(self, reduced_config):
        """Should raise the ASR with every step in maximum transmit power."""
        table = run_sweep("pmax", "10,20,30", reduced_config, "strategy3", 10, SEEDS)
        asr = _asr(table)

        assert asr[0] < asr[1] < asr[2]

    def test_asr_decreases_with_impairments(self, reduced_config):
        """Should lower the ASR with every step in impairment level."""
        table = run_sweep("kappa", "0.0,0.1,0.2", reduced_config, "strategy3", 10, SEEDS)
        asr = _asr(table)

        assert asr[0] > asr[1] > asr[2]

    def test_layers_have_diminishing_returns(self, reduced_config):
        """Should gain less from 4 to 6 layers than from 2 to 4 with random search."""
        table = run_sweep("m", "2,4,6", reduced_config, "random_search", 10, SEEDS)
        asr = _asr(table)

        assert asr[1] - asr[0] > asr[2] - asr[1]


class TestLearningTrend:
    """PPO-BOP against static baselines on identical channel streams."""

    @pytest.mark.parametrize("seed", SEEDS)
    def test_beats_static_strategies(self, reduced_config, seed):
        """Should exceed strategies 2 and 3 by at least 20% on every seed."""
        table = compare(
            reduced_config, ["strategy2", "strategy3", "ppo_bop"], episodes=10, seeds=(seed,)
        )
        strategy2, strategy3, learned = _asr(table)

        assert learned >= 1.2 * max(strategy2, strategy3)
