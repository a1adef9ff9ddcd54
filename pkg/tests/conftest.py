"""Pytest fixtures for the SIM secrecy simulator and trainer."""

import numpy as np
import pytest

from sim_secrecy.config import AblationFlags, ExperimentConfig, ScenarioConfig, TrainerConfig
from sim_secrecy.core.em import build_geometry
from sim_secrecy.core.env import SecureUplinkEnv
from sim_secrecy.rl.network import ActorCritic


@pytest.fixture
def rng():
    """Seeded generator shared by a single test."""
    return np.random.default_rng(1234)


@pytest.fixture
def scenario():
    """Small scenario: 2 layers of 2x2 atoms, 2 users, 5 slots per episode."""
    return ScenarioConfig(layers=2, atoms_per_layer=4, num_users=2, slots_per_episode=5)


@pytest.fixture
def trainer_config():
    """Tiny network and short schedule so a full training run takes a moment."""
    return TrainerConfig(
        hidden_size=8,
        attention_heads=2,
        lstm_layers=1,
        history_length=3,
        batch_size=8,
        update_epochs=2,
        warmup_episodes=2,
        episodes=2,
        eval_episodes=2,
        checkpoint_every=1,
        buffer_capacity=100,
        threshold_window=50,
        convergence_window=2,
        convergence_patience=1,
    )


@pytest.fixture
def tiny_config(scenario, trainer_config):
    return ExperimentConfig(scenario=scenario, trainer=trainer_config)


@pytest.fixture
def geometry(scenario):
    return build_geometry(
        scenario.layers,
        scenario.atoms_per_layer,
        scenario.wavelength,
        scenario.num_users,
        scenario.sim_thickness_wavelengths,
    )


@pytest.fixture
def env(scenario):
    """Environment reset and ready to step."""
    environment = SecureUplinkEnv(scenario, seed=7)
    environment.reset()
    return environment


@pytest.fixture
def network(scenario, trainer_config):
    """Full actor-critic (Bi-LSTM + attention) over the small scenario."""
    return ActorCritic(
        scenario.state_dim,
        scenario.action_dim,
        trainer_config,
        AblationFlags(),
        np.random.default_rng(0),
    )


@pytest.fixture
def windows(scenario, trainer_config, rng):
    """Batch of 4 random state windows."""
    return rng.standard_normal((4, trainer_config.history_length, scenario.state_dim))
