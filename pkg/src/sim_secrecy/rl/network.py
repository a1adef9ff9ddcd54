"""
Actor-critic network: shared feature encoder, Gaussian actor and value critic.

The recurrent encoder runs a stacked Bi-LSTM over the state window, optionally
applies self-attention to its output sequence, and reads the last position plus
a residual projection of the last input state. With the Bi-LSTM ablated, each
state is embedded by a dense layer and the flattened window is encoded densely.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

import numpy as np

from .attention import MultiHeadSelfAttention
from .layers import Dense, TanhDense
from .lstm import BiLSTMStack
from .params import ParameterStore
from .policy import GaussianPolicyHead, ValueHead, gaussian_log_density

if TYPE_CHECKING:
    from ..config import AblationFlags, TrainerConfig

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class ForwardPass:
    mean: np.ndarray  # (B, A)
    log_std: np.ndarray  # (A,)
    value: np.ndarray  # (B,)
    cache: dict = field(repr=False, default_factory=dict)

    def log_prob(self, actions: np.ndarray) -> np.ndarray:
        return gaussian_log_density(actions, self.mean, self.log_std)


class ActorCritic:
    def __init__(
        self,
        state_dim: int,
        action_dim: int,
        trainer: "TrainerConfig",
        ablation: "AblationFlags",
        rng: np.random.Generator,
    ):
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.history_length = trainer.history_length
        self.recurrent = not ablation.disable_bilstm
        hidden = trainer.hidden_size
        self.store = ParameterStore()
        store = self.store

        if self.recurrent:
            self.stack = BiLSTMStack(
                store, "encoder.bilstm", state_dim, hidden, trainer.lstm_layers, rng
            )
            self.residual = Dense(store, "encoder.residual", state_dim, hidden, rng)
        else:
            self.embed = TanhDense(store, "encoder.embed", state_dim, hidden, rng)
            self.window = TanhDense(
                store, "encoder.window", trainer.history_length * hidden, hidden, rng
            )

        self.attention: Optional[MultiHeadSelfAttention] = None
        if not ablation.disable_mhsa:
            self.attention = MultiHeadSelfAttention(
                store, "encoder.mhsa", hidden, trainer.attention_heads, rng
            )

        self.actor_hidden = TanhDense(store, "actor.hidden", hidden, hidden, rng)
        self.policy = GaussianPolicyHead(
            store, "actor.policy", hidden, action_dim, trainer.init_log_std, rng
        )
        self.critic_hidden = TanhDense(store, "critic.hidden", hidden, hidden, rng)
        self.value_head = ValueHead(store, "critic.value", hidden, rng)

        logger.debug(
            f"ActorCritic with {store.num_parameters} parameters "
            f"(recurrent={self.recurrent}, attention={self.attention is not None})"
        )

    def encode(self, windows: np.ndarray) -> tuple[np.ndarray, dict]:
        cache: dict = {}
        if self.recurrent:
            seq, cache["stack"] = self.stack.forward(windows)
            if self.attention is not None:
                seq, cache["attention"] = self.attention.forward(seq)
            projected, cache["residual"] = self.residual.forward(windows[:, -1])
            cache["steps"] = seq.shape[1]
            return seq[:, -1] + projected, cache

        seq, cache["embed"] = self.embed.forward(windows)
        if self.attention is not None:
            seq, cache["attention"] = self.attention.forward(seq)
        cache["seq_shape"] = seq.shape
        feature, cache["window"] = self.window.forward(seq.reshape(seq.shape[0], -1))
        return feature, cache

    def encode_backward(self, d_feature: np.ndarray, cache: dict) -> None:
        if self.recurrent:
            self.residual.backward(d_feature, cache["residual"])
            d_seq = np.zeros((d_feature.shape[0], cache["steps"], d_feature.shape[1]))
            d_seq[:, -1] = d_feature
            if self.attention is not None:
                d_seq = self.attention.backward(d_seq, cache["attention"])
            self.stack.backward(d_seq, cache["stack"])
            return

        d_seq = self.window.backward(d_feature, cache["window"]).reshape(cache["seq_shape"])
        if self.attention is not None:
            d_seq = self.attention.backward(d_seq, cache["attention"])
        self.embed.backward(d_seq, cache["embed"])

    def forward(self, windows: np.ndarray) -> ForwardPass:
        """Run the whole network on a batch of windows (B, H, state_dim)."""
        feature, enc_cache = self.encode(windows)
        actor_h, actor_cache = self.actor_hidden.forward(feature)
        mean, log_std, policy_cache = self.policy.forward(actor_h)
        critic_h, critic_cache = self.critic_hidden.forward(feature)
        value, value_cache = self.value_head.forward(critic_h)
        return ForwardPass(
            mean=mean,
            log_std=log_std,
            value=value,
            cache={
                "encoder": enc_cache,
                "actor": actor_cache,
                "policy": policy_cache,
                "critic": critic_cache,
                "value": value_cache,
            },
        )

    def backward(
        self,
        fp: ForwardPass,
        d_mean: np.ndarray,
        d_log_std: np.ndarray,
        d_value: np.ndarray,
    ) -> None:
        """Accumulate parameter gradients given loss derivatives w.r.t. the outputs."""
        c = fp.cache
        d_actor_h = self.policy.backward(d_mean, d_log_std, c["policy"])
        d_feature = self.actor_hidden.backward(d_actor_h, c["actor"])
        d_critic_h = self.value_head.backward(d_value, c["value"])
        d_feature = d_feature + self.critic_hidden.backward(d_critic_h, c["critic"])
        self.encode_backward(d_feature, c["encoder"])

    def act(
        self, window: np.ndarray, rng: np.random.Generator, deterministic: bool = False
    ) -> tuple[np.ndarray, float, float]:
        """
        Choose an action for one window (H, state_dim).

        Returns:
            (pre-clip action, its log-density, state value); deterministic returns the mean
        """
        fp = self.forward(window[None])
        mean = fp.mean[0]
        if deterministic:
            raw = mean.copy()
        else:
            raw = mean + np.exp(fp.log_std) * rng.standard_normal(mean.shape)
        log_prob = float(gaussian_log_density(raw, mean, fp.log_std))
        return raw, log_prob, float(fp.value[0])

    def log_prob(self, windows: np.ndarray, actions: np.ndarray) -> np.ndarray:
        return self.forward(windows).log_prob(actions)

    def values(self, windows: np.ndarray) -> np.ndarray:
        return self.forward(windows).value
