"""Unit tests for the static baselines and random search."""

import numpy as np
import pytest

from sim_secrecy.core.exceptions import UnknownStrategyError
from sim_secrecy.core.metrics import snapshot_from
from sim_secrecy.harness.strategies import (
    STRATEGIES,
    parse_strategy,
    random_search_scores,
    strategy_configuration,
    strategy_env,
    strategy_eval,
)


class TestParseStrategy:
    """Tests for strategy identifiers."""

    @pytest.mark.parametrize("value, expected", [(1, 1), ("2", 2), ("strategy3", 3)])
    def test_accepted(self, value, expected):
        """Should accept integers, digit strings and strategyN names."""
        assert parse_strategy(value) == expected

    @pytest.mark.parametrize("value", [0, 4, "strategy9", "best"])
    def test_rejected(self, value):
        """Should raise UnknownStrategyError outside 1-3."""
        with pytest.raises(UnknownStrategyError):
            parse_strategy(value)


class TestConfigurations:
    """Tests for the fixed configurations."""

    def test_strategy_one_has_no_sim(self, scenario):
        """Should use full power and no phase configuration."""
        phases, powers = strategy_configuration(1, scenario)

        assert phases is None
        assert np.allclose(powers, scenario.max_power_w)
        assert not strategy_env(1, scenario, 0).use_sim

    def test_uniform_phases(self, scenario):
        """Should set every phase to pi for strategies 2 and 3."""
        for strategy in (2, 3):
            phases, _ = strategy_configuration(strategy, scenario)
            assert np.allclose(phases.phases, np.pi)

    def test_full_power_doubles_numerators(self, scenario):
        """Should give strategy 3 received powers exactly twice those of strategy 2."""
        env = strategy_env(2, scenario, seed=3)
        env.reset()
        half_phases, half = strategy_configuration(2, scenario)
        full_phases, full = strategy_configuration(3, scenario)
        g = env.surface.beamforming(half_phases)

        low = snapshot_from(env.channels, half, 0.1, 1.0, g, env.surface.input_vectors)
        high = snapshot_from(env.channels, full, 0.1, 1.0, g, env.surface.input_vectors)

        assert np.allclose(full_phases.phases, half_phases.phases)
        assert np.allclose(high.gains * high.powers, 2.0 * low.gains * low.powers)


class TestStrategyEval:
    """Tests for baseline evaluation."""

    def test_row(self, scenario):
        """Should return one row with the strategy name, episode count and seed."""
        row = strategy_eval(2, scenario, episodes=3, seed=5)

        assert row.run_id == "strategy2"
        assert row.method == STRATEGIES[2]
        assert row.episodes == 3
        assert row.seeds == (5,)
        assert row.mean_asr >= 0.0

    def test_reproducible(self, scenario):
        """Should give identical rows for identical seeds."""
        assert strategy_eval(3, scenario, 2, 9) == strategy_eval(3, scenario, 2, 9)

    def test_strategy_one_ignores_sim_size(self, scenario):
        """Should not depend on the number of layers or atoms."""
        small = strategy_eval(1, scenario, 2, 4)
        bigger = scenario.model_copy(update={"layers": 4, "atoms_per_layer": 9})
        large = strategy_eval(1, bigger, 2, 4)

        assert small.mean_asr == large.mean_asr
        assert small.mean_reward == large.mean_reward

    def test_unknown_strategy(self, scenario):
        """Should raise UnknownStrategyError for strategy 4."""
        with pytest.raises(UnknownStrategyError):
            strategy_eval(4, scenario, 1, 0)


class TestRandomSearch:
    """Tests for the random phase search."""

    def test_scores(self, scenario):
        """Should score every episode with a non-negative ASR."""
        scores = random_search_scores(scenario, episodes=2, seed=1, candidates=4)

        assert len(scores.asr) == 2
        assert all(asr >= 0.0 for asr in scores.asr)

