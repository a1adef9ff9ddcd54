"""Multi-head scaled dot-product self-attention with a residual connection."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import softmax

from ..core.exceptions import DimensionMismatchError
from .layers import Dense
from .params import ParameterStore


class MultiHeadSelfAttention:
    """
    Self-attention over the positions of a (B, T, D) sequence.

    Queries, keys and values come from one fused projection (D -> 3D). Head
    outputs are concatenated, projected back to D and added to the input.
    """

    def __init__(
        self,
        store: ParameterStore,
        name: str,
        embed_dim: int,
        heads: int,
        rng: np.random.Generator,
    ):
        if heads < 1 or embed_dim % heads != 0:
            raise DimensionMismatchError("attention heads", f"divisor of {embed_dim}", heads)
        self.embed_dim = embed_dim
        self.heads = heads
        self.head_dim = embed_dim // heads
        self.qkv = Dense(store, f"{name}.qkv", embed_dim, 3 * embed_dim, rng)
        self.proj = Dense(store, f"{name}.proj", embed_dim, embed_dim, rng)

    def _split(self, x: np.ndarray) -> np.ndarray:
        batch, steps, _ = x.shape
        return x.reshape(batch, steps, self.heads, self.head_dim).transpose(0, 2, 1, 3)

    def _merge(self, x: np.ndarray) -> np.ndarray:
        batch, _, steps, _ = x.shape
        return x.transpose(0, 2, 1, 3).reshape(batch, steps, self.embed_dim)

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, tuple]:
        if x.shape[-1] != self.embed_dim:
            raise DimensionMismatchError("attention input", self.embed_dim, x.shape[-1])
        qkv, qkv_cache = self.qkv.forward(x)
        q, k, v = (self._split(part) for part in np.split(qkv, 3, axis=-1))

        scale = 1.0 / math.sqrt(self.head_dim)
        weights = softmax((q @ k.transpose(0, 1, 3, 2)) * scale, axis=-1)
        heads_out = weights @ v
        out, proj_cache = self.proj.forward(self._merge(heads_out))
        return x + out, (qkv_cache, q, k, v, weights, proj_cache)

    def backward(self, dy: np.ndarray, cache: tuple) -> np.ndarray:
        qkv_cache, q, k, v, weights, proj_cache = cache
        scale = 1.0 / math.sqrt(self.head_dim)

        d_heads = self._split(self.proj.backward(dy, proj_cache))
        d_weights = d_heads @ v.transpose(0, 1, 3, 2)
        dv = weights.transpose(0, 1, 3, 2) @ d_heads
        d_scores = weights * (d_weights - np.sum(d_weights * weights, axis=-1, keepdims=True))
        dq = (d_scores @ k) * scale
        dk = (d_scores.transpose(0, 1, 3, 2) @ q) * scale

        d_qkv = np.concatenate([self._merge(dq), self._merge(dk), self._merge(dv)], axis=-1)
        return dy + self.qkv.backward(d_qkv, qkv_cache)


def mhsa(features: np.ndarray, layer: MultiHeadSelfAttention) -> np.ndarray:
    """Apply a self-attention block to a (B, T, D) sequence."""
    out, _ = layer.forward(features)
    return out
