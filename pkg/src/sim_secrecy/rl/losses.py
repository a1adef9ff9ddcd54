"""
Return, advantage and loss algebra for PPO-BOP.

Loss functions return the scalar loss together with its derivative w.r.t. the
quantity the network produced (log-densities or values), so the trainer can feed
them straight into ActorCritic.backward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..core.exceptions import EmptyTrajectoryError


@dataclass(frozen=True, eq=False)
class AdvantageBatch:
    advantages: np.ndarray
    returns: np.ndarray


@dataclass(frozen=True, eq=False)
class SurrogateResult:
    loss: float
    grad_log_prob: np.ndarray  # d loss / d log pi(a|s), per sample
    clip_fraction: float


def _as_array(values, what: str) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if array.size == 0:
        raise EmptyTrajectoryError(what)
    return array


def gae_advantages(
    rewards: Sequence[float],
    values: Sequence[float],
    next_values: Sequence[float],
    dones: Sequence[bool],
    discount: float,
    gae_lambda: float,
) -> AdvantageBatch:
    """
    Generalized advantage estimation over one contiguous segment.

    delta_t = r_t + discount * V(s_{t+1}) * (1 - done_t) - V(s_t), A_t sums
    (discount * lambda)^i * delta_{t+i} without crossing terminal steps, and
    returns = A + V.

    Raises:
        EmptyTrajectoryError: If the segment has no steps
    """
    rewards = _as_array(rewards, "gae_advantages")
    values = np.asarray(values, dtype=float)
    next_values = np.asarray(next_values, dtype=float)
    not_done = 1.0 - np.asarray(dones, dtype=float)

    deltas = rewards + discount * next_values * not_done - values
    advantages = np.zeros_like(rewards)
    running = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        running = deltas[t] + discount * gae_lambda * not_done[t] * running
        advantages[t] = running
    return AdvantageBatch(advantages=advantages, returns=advantages + values)


def normalize_advantages(advantages: np.ndarray, eps: float = 1e-8) -> np.ndarray:
    advantages = np.asarray(advantages, dtype=float)
    centered = advantages - advantages.mean()
    if advantages.size < 2:
        return centered
    return centered / (advantages.std() + eps)


def clipped_surrogate(
    ratio: np.ndarray, advantages: np.ndarray, low, high
) -> SurrogateResult:
    """
    -mean(min(ratio * A, clip(ratio, low, high) * A)) with its gradient w.r.t. log pi.

    The gradient flows only where the unclipped term is the active minimum.
    """
    ratio = np.asarray(ratio, dtype=float)
    advantages = np.asarray(advantages, dtype=float)
    unclipped = ratio * advantages
    clipped = np.clip(ratio, low, high) * advantages
    objective = np.minimum(unclipped, clipped)
    active = unclipped <= clipped
    n = ratio.size
    grad = np.where(active, -advantages * ratio / n, 0.0)
    outside = (ratio < low) | (ratio > high)
    return SurrogateResult(
        loss=float(-objective.mean()),
        grad_log_prob=grad,
        clip_fraction=float(np.mean(outside)),
    )


def clipped_policy_loss(
    log_prob: np.ndarray, old_log_prob: np.ndarray, advantages: np.ndarray, clip_epsilon: float
) -> SurrogateResult:
    """Standard PPO clipped loss with ratio pi / pi_old and bounds 1 -/+ epsilon."""
    ratio = np.exp(np.asarray(log_prob) - np.asarray(old_log_prob))
    return clipped_surrogate(ratio, advantages, 1.0 - clip_epsilon, 1.0 + clip_epsilon)


def opdu_loss(
    log_prob: np.ndarray,
    behavior_log_prob: np.ndarray,
    old_log_prob: np.ndarray,
    advantages: np.ndarray,
    clip_epsilon: float,
) -> SurrogateResult:
    """
    Off-policy surrogate for replayed data.

    The ratio is pi / mu with clip bounds (pi_old / mu)(1 -/+ epsilon), so with
    mu = pi_old it is exactly the standard clipped loss.
    """
    behavior_log_prob = np.asarray(behavior_log_prob, dtype=float)
    ratio = np.exp(np.asarray(log_prob) - behavior_log_prob)
    anchor = np.exp(np.asarray(old_log_prob) - behavior_log_prob)
    return clipped_surrogate(
        ratio, advantages, anchor * (1.0 - clip_epsilon), anchor * (1.0 + clip_epsilon)
    )


def kl_estimate(behavior_log_prob: np.ndarray, log_prob: np.ndarray) -> float:
    """Sample estimate of KL(mu || pi) from actions drawn under mu."""
    behavior_log_prob = np.asarray(behavior_log_prob, dtype=float)
    if behavior_log_prob.size == 0:
        return 0.0
    return float(np.mean(behavior_log_prob - np.asarray(log_prob, dtype=float)))


def adapt_alpha(alpha: float, kl: float, kl_threshold: float, alpha_min: float) -> float:
    """Shrink the offline share when replayed data drifted too far, else grow it by 5%."""
    if kl > kl_threshold:
        return max(alpha_min, alpha * kl_threshold / kl)
    return min(1.0, alpha * 1.05)


def pbe_step_weights(
    log_prob: np.ndarray,
    exponent: float,
    action_dim: int = 1,
    density: str = "joint",
) -> np.ndarray:
    """
    Bounded policy weights w = min(1, pi(a|s))^exponent.

    "joint" uses the full action density, "per_dimension" its geometric mean over
    action dimensions. Computed in log space so large log-densities never overflow.
    """
    log_prob = np.asarray(log_prob, dtype=float)
    if density == "per_dimension":
        log_prob = log_prob / action_dim
    elif density != "joint":
        raise ValueError(f"Unknown PBE density mode: {density}")
    return np.exp(exponent * np.minimum(log_prob, 0.0))


def pbe_return(
    rewards: Sequence[float],
    weights: Sequence[float],
    clipped_discount: float,
    dones: Optional[Sequence[bool]] = None,
) -> np.ndarray:
    """
    Policy-weighted discounted returns.

    R(t) = sum_{c>=t} discount^(c-t) * r(c) * prod_{v=t..c} w(v), evaluated as
    R(t) = w(t) * (r(t) + discount * R(t+1)); the tail is cut after terminal steps.

    Raises:
        EmptyTrajectoryError: If the segment has no steps
    """
    rewards = _as_array(rewards, "pbe_return")
    weights = np.asarray(weights, dtype=float)
    not_done = (
        np.ones_like(rewards) if dones is None else 1.0 - np.asarray(dones, dtype=float)
    )
    targets = np.zeros_like(rewards)
    tail = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        tail = weights[t] * (rewards[t] + clipped_discount * not_done[t] * tail)
        targets[t] = tail
    return targets


def pbe_q_backup(
    reward: float, next_values: Sequence[float], discount: float, done: bool = False
) -> float:
    """
    One-step backup r + discount * E_{a'~pi}[Q(s', a')].

    next_values are Q(s', a') at actions sampled from the policy (a single entry
    for a deterministic policy or for a state value V(s')).
    """
    if done:
        return float(reward)
    return float(reward + discount * np.mean(np.asarray(next_values, dtype=float)))


def value_loss(values: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error and its gradient w.r.t. the predicted values."""
    diff = np.asarray(values, dtype=float) - np.asarray(targets, dtype=float)
    return float(np.mean(diff * diff)), 2.0 * diff / diff.size


def is_finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)
