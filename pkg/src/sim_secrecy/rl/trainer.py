"""
PPO-BOP training loop.

Each training episode is collected with the current policy, stored in the replay
buffer, and followed by one update round on a batch that mixes the freshest
online steps with ceil(alpha * b) replayed records. The offline share alpha
adapts to the KL divergence between the stored behavior policies and the
current one.
"""

from __future__ import annotations

import logging
import math
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np

from ..core.env import SecureUplinkEnv, StateWindow, Transition
from ..core.exceptions import NumericDivergenceError
from ..utils.io import JsonLinesWriter
from .buffer import ReplayBuffer
from .checkpoint import save_checkpoint
from .losses import (
    adapt_alpha,
    clipped_policy_loss,
    gae_advantages,
    is_finite,
    kl_estimate,
    normalize_advantages,
    opdu_loss,
    pbe_q_backup,
    pbe_return,
    pbe_step_weights,
    value_loss,
)
from .network import ActorCritic
from .optim import AdamW
from .policy import gaussian_entropy, log_density_grads

if TYPE_CHECKING:
    from ..config import ExperimentConfig

logger = logging.getLogger(__name__)

EnvFactory = Callable[[np.random.Generator], SecureUplinkEnv]


@dataclass
class EpisodeRollout:
    transitions: list[Transition]
    secrecy: np.ndarray  # (T, K) per-user secrecy rates

    @property
    def rewards(self) -> np.ndarray:
        return np.array([t.reward for t in self.transitions])

    @property
    def asr(self) -> float:
        """Time-averaged sum secrecy rate of the episode."""
        return float(self.secrecy.sum(axis=1).mean())

    @property
    def per_user_asr(self) -> list[float]:
        return self.secrecy.mean(axis=0).tolist()


@dataclass
class UpdateStats:
    policy_loss: float
    value_loss: float
    offline_kl: float
    approx_kl: float
    alpha: float
    epochs: int
    grad_norm: float
    clip_fraction: float
    online: int
    offline: int


@dataclass
class TrainingResult:
    network: ActorCritic
    history: list[dict]
    converged_episode: Optional[int]
    alpha: float
    checkpoints: list[Path] = field(default_factory=list)


class ConvergenceMonitor:
    """
    Flags convergence when successive moving averages of episode ASR differ by less
    than `threshold` for `patience` consecutive episodes.
    """

    def __init__(self, threshold: float, window: int, patience: int):
        self.threshold = threshold
        self.patience = patience
        self._values: deque[float] = deque(maxlen=window)
        self._previous: Optional[float] = None
        self._streak = 0
        self.converged_at: Optional[int] = None

    def update(self, episode: int, value: float) -> bool:
        self._values.append(value)
        if len(self._values) < self._values.maxlen:
            return False
        average = float(np.mean(self._values))
        if self._previous is not None and abs(average - self._previous) < self.threshold:
            self._streak += 1
        else:
            self._streak = 0
        self._previous = average
        if self.converged_at is None and self._streak >= self.patience:
            self.converged_at = episode
            return True
        return False


def critic_update(network: ActorCritic, windows: np.ndarray, targets: np.ndarray) -> float:
    """
    Critic regression step: MSE between V(s) and the targets.

    Resets gradients and accumulates the critic gradient only, which reaches the
    value head, the critic hidden layer and the shared encoder.
    """
    fp = network.forward(windows)
    loss, d_value = value_loss(fp.value, targets)
    network.store.zero_grad()
    network.backward(fp, np.zeros_like(fp.mean), np.zeros_like(fp.log_std), d_value)
    return loss


class PpoBopTrainer:
    def __init__(
        self,
        config: "ExperimentConfig",
        env_factory: Optional[EnvFactory] = None,
    ):
        self.config = config
        self.cfg = config.trainer
        self.ablation = config.ablation

        env_seed, policy_seed, buffer_seed, init_seed = np.random.SeedSequence(
            self.cfg.seed
        ).spawn(4)
        self.env_rng = np.random.default_rng(env_seed)
        self.policy_rng = np.random.default_rng(policy_seed)
        self.buffer_rng = np.random.default_rng(buffer_seed)

        if env_factory is None:
            self.env = SecureUplinkEnv(config.scenario, rng=self.env_rng)
        else:
            self.env = env_factory(self.env_rng)

        self.network = ActorCritic(
            self.env.state_dim,
            self.env.action_dim,
            self.cfg,
            self.ablation,
            np.random.default_rng(init_seed),
        )
        self.optimizer = AdamW(
            self.network.store, lr=self.cfg.learning_rate, weight_decay=self.cfg.weight_decay
        )
        self.buffer = ReplayBuffer(
            self.cfg.buffer_capacity, self.cfg.priority_floor, self.cfg.threshold_window
        )
        self.use_opdu = not self.ablation.disable_opdu
        self.use_pf = not self.ablation.disable_pf
        self.alpha = self.cfg.alpha_init if self.use_opdu else 0.0
        self.policy_version = 0

        per_episode = config.scenario.slots_per_episode
        self._recent: deque[list[Transition]] = deque(
            maxlen=math.ceil(self.cfg.batch_size / per_episode) + 1
        )

    # --- rollouts -----------------------------------------------------------

    def collect_episode(self, deterministic: bool = False) -> EpisodeRollout:
        """Run one episode with the current policy on the training environment."""
        env = self.env
        window = StateWindow(self.cfg.history_length)
        current = window.reset(env.scaler(env.reset()))
        transitions: list[Transition] = []
        secrecy = []

        for _ in range(env.scenario.slots_per_episode):
            action, log_prob, _ = self.network.act(current, self.policy_rng, deterministic)
            result = env.step(action)
            following = window.push(env.scaler(result.state))
            transitions.append(
                Transition(
                    window=current,
                    action=action,
                    reward=result.reward,
                    next_window=following,
                    done=result.done,
                    log_prob=log_prob,
                    policy_version=self.policy_version,
                )
            )
            secrecy.append(result.report.secrecy)
            current = following
            if result.done:
                break
        return EpisodeRollout(transitions, np.array(secrecy))

    def _store(self, rollout: EpisodeRollout) -> None:
        self.buffer.extend(rollout.transitions)
        self._recent.append(rollout.transitions)

    def _online_segments(self, count: int) -> list[list[Transition]]:
        """Most recent `count` online steps as contiguous segments, oldest first."""
        segments: list[list[Transition]] = []
        remaining = count
        for episode in reversed(self._recent):
            if remaining <= 0:
                break
            segment = episode[-remaining:] if remaining < len(episode) else episode
            segments.append(segment)
            remaining -= len(segment)
        return list(reversed(segments))

    # --- targets ------------------------------------------------------------

    def _online_targets(
        self,
        segments: list[list[Transition]],
        values: np.ndarray,
        next_values: np.ndarray,
        log_prob: np.ndarray,
    ) -> tuple[np.ndarray, np.ndarray]:
        advantages, targets = [], []
        start = 0
        for segment in segments:
            stop = start + len(segment)
            rewards = [t.reward for t in segment]
            dones = [t.done for t in segment]
            gae = gae_advantages(
                rewards,
                values[start:stop],
                next_values[start:stop],
                dones,
                self.cfg.discount,
                self.cfg.gae_lambda,
            )
            advantages.append(gae.advantages)
            if self.use_pf:
                weights = pbe_step_weights(
                    log_prob[start:stop],
                    self.cfg.probability_weighting,
                    self.env.action_dim,
                    self.cfg.pbe_density,
                )
                targets.append(pbe_return(rewards, weights, self.cfg.pbe_discount, dones))
            else:
                targets.append(gae.returns)
            start = stop
        if not segments:
            return np.zeros(0), np.zeros(0)
        return np.concatenate(advantages), np.concatenate(targets)

    def _offline_targets(
        self, batch: list[Transition], values: np.ndarray, next_values: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        targets = np.array(
            [
                pbe_q_backup(t.reward, [v_next], self.cfg.discount, t.done)
                for t, v_next in zip(batch, next_values)
            ]
        )
        return targets - values, targets

    # --- update -------------------------------------------------------------

    def update(self, episode: int) -> UpdateStats:
        """
        One PPO-BOP update round.

        Raises:
            NumericDivergenceError: If a loss or the gradient norm becomes non-finite
        """
        cfg = self.cfg
        n_offline = math.ceil(self.alpha * cfg.batch_size) if self.use_opdu else 0
        segments = self._online_segments(cfg.batch_size - n_offline)
        online = [t for segment in segments for t in segment]
        offline = self.buffer.sample(n_offline, self.buffer_rng) if n_offline else []
        batch = online + offline
        n_online, n = len(online), len(batch)

        windows = np.stack([t.window for t in batch])
        next_windows = np.stack([t.next_window for t in batch])
        actions = np.stack([t.action for t in batch])
        behavior = np.array([t.log_prob for t in batch])

        old_log_prob = self.network.forward(windows).log_prob(actions)
        offline_kl = kl_estimate(behavior[n_online:], old_log_prob[n_online:])
        if self.use_opdu:
            self.alpha = adapt_alpha(self.alpha, offline_kl, cfg.kl_threshold, cfg.alpha_min)

        stats = UpdateStats(
            policy_loss=0.0,
            value_loss=0.0,
            offline_kl=offline_kl,
            approx_kl=0.0,
            alpha=self.alpha,
            epochs=0,
            grad_norm=0.0,
            clip_fraction=0.0,
            online=n_online,
            offline=n - n_online,
        )

        for epoch in range(cfg.update_epochs):
            fp = self.network.forward(windows)
            log_prob = fp.log_prob(actions)
            if epoch > 0:
                stats.approx_kl = kl_estimate(old_log_prob, log_prob)
                if stats.approx_kl > cfg.target_kl:
                    logger.debug(
                        f"Episode {episode}: early stop after {epoch} epochs "
                        f"(KL {stats.approx_kl:.4f} > {cfg.target_kl})"
                    )
                    break

            values = fp.value
            next_values = self.network.values(next_windows)
            on_adv, on_targets = self._online_targets(
                segments, values[:n_online], next_values[:n_online], log_prob[:n_online]
            )
            off_adv, off_targets = self._offline_targets(
                offline, values[n_online:], next_values[n_online:]
            )
            advantages = normalize_advantages(np.concatenate([on_adv, off_adv]))
            targets = np.concatenate([on_targets, off_targets])

            grad_log_prob = np.zeros(n)
            policy_loss = 0.0
            clipped = 0.0
            if n_online:
                on = clipped_policy_loss(
                    log_prob[:n_online],
                    old_log_prob[:n_online],
                    advantages[:n_online],
                    cfg.clip_epsilon,
                )
                policy_loss += on.loss * n_online / n
                grad_log_prob[:n_online] = on.grad_log_prob * n_online / n
                clipped += on.clip_fraction * n_online / n
            if n > n_online:
                off = opdu_loss(
                    log_prob[n_online:],
                    behavior[n_online:],
                    old_log_prob[n_online:],
                    advantages[n_online:],
                    cfg.clip_epsilon,
                )
                policy_loss += off.loss * (n - n_online) / n
                grad_log_prob[n_online:] = off.grad_log_prob * (n - n_online) / n
                clipped += off.clip_fraction * (n - n_online) / n

            critic_loss, d_value = value_loss(values, targets)
            entropy = gaussian_entropy(fp.log_std)
            total = policy_loss + cfg.value_coef * critic_loss - cfg.entropy_coef * entropy
            if not is_finite(policy_loss, critic_loss, total):
                raise NumericDivergenceError(episode, "loss", total)

            d_mean, d_log_std = log_density_grads(actions, fp.mean, fp.log_std)
            d_mean = d_mean * grad_log_prob[:, None]
            d_log_std = (d_log_std * grad_log_prob[:, None]).sum(axis=0) - cfg.entropy_coef

            self.network.store.zero_grad()
            self.network.backward(fp, d_mean, d_log_std, cfg.value_coef * d_value)
            grad_norm = self.network.store.clip_grad_norm(cfg.max_grad_norm)
            if not is_finite(grad_norm):
                raise NumericDivergenceError(episode, "gradient norm", grad_norm)
            self.optimizer.step()

            stats.policy_loss = policy_loss
            stats.value_loss = critic_loss
            stats.grad_norm = grad_norm
            stats.clip_fraction = clipped
            stats.epochs = epoch + 1

        self.policy_version += 1
        return stats

    # --- main loop ----------------------------------------------------------

    def _record(
        self,
        episode: int,
        phase: str,
        rollout: EpisodeRollout,
        stats: Optional[UpdateStats],
        started: float,
    ) -> dict:
        return {
            "episode": episode,
            "phase": phase,
            "mean_reward": float(rollout.rewards.mean()),
            "mean_asr": rollout.asr,
            "per_user_asr": rollout.per_user_asr,
            "kl": stats.offline_kl if stats else None,
            "approx_kl": stats.approx_kl if stats else None,
            "alpha": self.alpha,
            "policy_loss": stats.policy_loss if stats else None,
            "value_loss": stats.value_loss if stats else None,
            "epochs": stats.epochs if stats else 0,
            "wall_time": time.monotonic() - started,
        }

    def _checkpoint(self, path: Path, episode: int) -> Path:
        meta = {
            "episode": episode,
            "alpha": self.alpha,
            "policy_version": self.policy_version,
            "config": self.config.model_dump(mode="json"),
        }
        return save_checkpoint(path, self.network.store, meta)

    def train(self, out_dir: Optional[Path | str] = None) -> TrainingResult:
        """
        Warm-up collection followed by training episodes with one update round each.

        Args:
            out_dir: Where metrics.jsonl and checkpoints go; nothing is written when None

        Raises:
            NumericDivergenceError: If training diverges
        """
        cfg = self.cfg
        started = time.monotonic()
        out = Path(out_dir) if out_dir is not None else None
        writer = JsonLinesWriter(out / "metrics.jsonl") if out is not None else None
        history: list[dict] = []
        checkpoints: list[Path] = []
        monitor = ConvergenceMonitor(
            cfg.convergence_threshold, cfg.convergence_window, cfg.convergence_patience
        )

        def emit(record: dict) -> None:
            history.append(record)
            if writer is not None:
                writer.write(record)

        try:
            for index in range(cfg.warmup_episodes):
                rollout = self.collect_episode()
                self._store(rollout)
                episode = index + 1 - cfg.warmup_episodes
                emit(self._record(episode, "warmup", rollout, None, started))
            logger.info(f"Warm-up done: {cfg.warmup_episodes} episodes, buffer {len(self.buffer)}")

            for episode in range(1, cfg.episodes + 1):
                rollout = self.collect_episode()
                self._store(rollout)
                stats = self.update(episode) if len(self.buffer) >= cfg.batch_size else None
                record = self._record(episode, "train", rollout, stats, started)
                emit(record)

                if episode % 10 == 0:
                    logger.info(
                        f"Episode {episode}/{cfg.episodes}: ASR {record['mean_asr']:.3f}, "
                        f"reward {record['mean_reward']:.3f}, alpha {self.alpha:.3f}"
                    )
                if out is not None and episode % cfg.checkpoint_every == 0:
                    path = out / "checkpoints" / f"episode_{episode:05d}.npz"
                    checkpoints.append(self._checkpoint(path, episode))
                if monitor.update(episode, record["mean_asr"]):
                    logger.info(f"Converged at episode {episode}")
                    if cfg.stop_on_convergence:
                        break
        finally:
            if writer is not None:
                writer.close()

        if monitor.converged_at is None:
            logger.warning("Training finished without meeting the convergence criterion")
        if out is not None:
            final_episode = history[-1]["episode"] if history else 0
            checkpoints.append(self._checkpoint(out / "checkpoints" / "final.npz", final_episode))

        return TrainingResult(
            network=self.network,
            history=history,
            converged_episode=monitor.converged_at,
            alpha=self.alpha,
            checkpoints=checkpoints,
        )


def train(
    config: "ExperimentConfig",
    env_factory: Optional[EnvFactory] = None,
    out_dir: Optional[Path | str] = None,
) -> TrainingResult:
    """Build a trainer for the config and run it end to end."""
    logger.info(
        f"Training PPO-BOP ({config.ablation.label}, seed {config.trainer.seed}, "
        f"{config.trainer.warmup_episodes}+{config.trainer.episodes} episodes)"
    )
    return PpoBopTrainer(config, env_factory).train(out_dir)
