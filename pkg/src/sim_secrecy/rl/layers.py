"""Dense layers and elementwise activations with explicit backward passes."""

from __future__ import annotations

import numpy as np

from .params import ParameterStore, fan_in_uniform


def sigmoid(x: np.ndarray) -> np.ndarray:
    # split by sign to avoid overflow in exp
    out = np.empty_like(x, dtype=float)
    positive = x >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-x[positive]))
    e = np.exp(x[~positive])
    out[~positive] = e / (1.0 + e)
    return out


def tanh_backward(dy: np.ndarray, y: np.ndarray) -> np.ndarray:
    return dy * (1.0 - y * y)


class Dense:
    """y = x @ W + b over the last axis; W has shape (in, out)."""

    def __init__(
        self,
        store: ParameterStore,
        name: str,
        in_dim: int,
        out_dim: int,
        rng: np.random.Generator,
    ):
        self.store = store
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.w_name = f"{name}.W"
        self.b_name = f"{name}.b"
        store.add(self.w_name, fan_in_uniform(rng, in_dim, (in_dim, out_dim)))
        store.add(self.b_name, np.zeros(out_dim))

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return x @ self.store[self.w_name] + self.store[self.b_name], x

    def backward(self, dy: np.ndarray, cache: np.ndarray) -> np.ndarray:
        x = cache
        flat_x = x.reshape(-1, self.in_dim)
        flat_dy = dy.reshape(-1, self.out_dim)
        self.store.accumulate(self.w_name, flat_x.T @ flat_dy)
        self.store.accumulate(self.b_name, flat_dy.sum(axis=0))
        return dy @ self.store[self.w_name].T


class TanhDense(Dense):
    """Dense layer followed by tanh."""

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, tuple]:
        pre, x_cache = super().forward(x)
        y = np.tanh(pre)
        return y, (x_cache, y)

    def backward(self, dy: np.ndarray, cache: tuple) -> np.ndarray:
        x_cache, y = cache
        return super().backward(tanh_backward(dy, y), x_cache)
