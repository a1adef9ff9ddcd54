"""Diagonal Gaussian policy head with state-independent log-std, and the value head."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .layers import Dense, tanh_backward
from .params import ParameterStore

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class PolicySample:
    mean: np.ndarray
    std: np.ndarray
    raw: np.ndarray  # pre-clip sample, the density is evaluated here
    sample: np.ndarray  # clipped to [-1, 1]
    log_density: np.ndarray


def gaussian_log_density(actions: np.ndarray, mean: np.ndarray, log_std: np.ndarray) -> np.ndarray:
    """Diagonal Gaussian log-pdf summed over the last axis."""
    z = (actions - mean) * np.exp(-log_std)
    return -0.5 * np.sum(z * z, axis=-1) - np.sum(log_std) - 0.5 * actions.shape[-1] * LOG_2PI


def log_density_grads(
    actions: np.ndarray, mean: np.ndarray, log_std: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample derivatives of the log-density w.r.t. mean and log-std, both (B, A)."""
    inv_var = np.exp(-2.0 * log_std)
    diff = actions - mean
    return diff * inv_var, diff * diff * inv_var - 1.0


def gaussian_entropy(log_std: np.ndarray) -> float:
    return float(np.sum(log_std) + 0.5 * log_std.size * (1.0 + LOG_2PI))


class GaussianPolicyHead:
    """mean = tanh(dense(feature)); std = exp(log_std), log_std shared across states."""

    def __init__(
        self,
        store: ParameterStore,
        name: str,
        in_dim: int,
        action_dim: int,
        init_log_std: float,
        rng: np.random.Generator,
    ):
        self.store = store
        self.action_dim = action_dim
        self.mean_layer = Dense(store, f"{name}.mean", in_dim, action_dim, rng)
        self.log_std_name = f"{name}.log_std"
        store.add(self.log_std_name, np.full(action_dim, init_log_std))

    @property
    def log_std(self) -> np.ndarray:
        return self.store[self.log_std_name]

    def forward(self, feature: np.ndarray) -> tuple[np.ndarray, np.ndarray, tuple]:
        pre, cache = self.mean_layer.forward(feature)
        mean = np.tanh(pre)
        return mean, self.log_std.copy(), (cache, mean)

    def backward(self, d_mean: np.ndarray, d_log_std: np.ndarray, cache: tuple) -> np.ndarray:
        layer_cache, mean = cache
        self.store.accumulate(self.log_std_name, d_log_std)
        return self.mean_layer.backward(tanh_backward(d_mean, mean), layer_cache)


def gaussian_policy(
    feature: np.ndarray, head: GaussianPolicyHead, rng: np.random.Generator
) -> PolicySample:
    """Sample actions for a batch of features; the density is that of the pre-clip draw."""
    mean, log_std, _ = head.forward(feature)
    std = np.exp(log_std)
    raw = mean + std * rng.standard_normal(mean.shape)
    return PolicySample(
        mean=mean,
        std=np.broadcast_to(std, mean.shape).copy(),
        raw=raw,
        sample=np.clip(raw, -1.0, 1.0),
        log_density=gaussian_log_density(raw, mean, log_std),
    )


class ValueHead:
    """Dense projection of a feature to one real per sample."""

    def __init__(self, store: ParameterStore, name: str, in_dim: int, rng: np.random.Generator):
        self.layer = Dense(store, name, in_dim, 1, rng)

    def forward(self, feature: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        out, cache = self.layer.forward(feature)
        return out[..., 0], cache

    def backward(self, d_value: np.ndarray, cache: np.ndarray) -> np.ndarray:
        return self.layer.backward(d_value[..., None], cache)
