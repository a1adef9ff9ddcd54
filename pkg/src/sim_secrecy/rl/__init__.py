"""Numpy actor-critic networks and the PPO-BOP trainer."""

from .buffer import ReplayBuffer
from .checkpoint import load_checkpoint, read_checkpoint, save_checkpoint
from .network import ActorCritic, ForwardPass
from .trainer import PpoBopTrainer, TrainingResult, critic_update, train

__all__ = [
    "ReplayBuffer",
    "ActorCritic",
    "ForwardPass",
    "PpoBopTrainer",
    "TrainingResult",
    "critic_update",
    "train",
    "save_checkpoint",
    "load_checkpoint",
    "read_checkpoint",
]
