"""LSTM cell, bidirectional layers and stacked Bi-LSTM with backprop through time.

Gate weights follow the [h_prev, x] convention: W_* has shape (H, H + I) and the
pre-activation of a gate is [h_prev, x] @ W_*.T + b_*.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from ..core.exceptions import DimensionMismatchError
from .layers import Dense, sigmoid
from .params import ParameterStore, fan_in_uniform, orthogonal

GATES = ("f", "i", "C", "o")


def lstm_cell(
    x: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray, params: Mapping[str, np.ndarray]
) -> tuple[np.ndarray, np.ndarray, tuple]:
    """
    One LSTM step over a batch.

    Args:
        x: Inputs (B, I)
        h_prev: Previous hidden state (B, H)
        c_prev: Previous cell state (B, H)
        params: W_f, W_i, W_C, W_o of shape (H, H + I) and b_f, b_i, b_C, b_o of shape (H,)

    Returns:
        (h, c, cache) where cache feeds lstm_cell_backward

    Raises:
        DimensionMismatchError: If the inputs do not match the weight shapes
    """
    hidden = h_prev.shape[-1]
    expected = (hidden, hidden + x.shape[-1])
    if params["W_f"].shape != expected:
        raise DimensionMismatchError("LSTM gate weights", expected, params["W_f"].shape)
    if c_prev.shape != h_prev.shape:
        raise DimensionMismatchError("LSTM cell state", h_prev.shape, c_prev.shape)

    z = np.concatenate([h_prev, x], axis=-1)
    f = sigmoid(z @ params["W_f"].T + params["b_f"])
    i = sigmoid(z @ params["W_i"].T + params["b_i"])
    c_hat = np.tanh(z @ params["W_C"].T + params["b_C"])
    o = sigmoid(z @ params["W_o"].T + params["b_o"])
    c = f * c_prev + i * c_hat
    tanh_c = np.tanh(c)
    h = o * tanh_c
    return h, c, (z, f, i, c_hat, o, c_prev, tanh_c)


def lstm_cell_backward(
    dh: np.ndarray, dc: np.ndarray, cache: tuple, params: Mapping[str, np.ndarray]
) -> tuple[np.ndarray, np.ndarray, np.ndarray, dict[str, np.ndarray]]:
    """
    Reverse pass of lstm_cell.

    Returns:
        (dx, dh_prev, dc_prev, grads) with grads keyed like params
    """
    z, f, i, c_hat, o, c_prev, tanh_c = cache
    hidden = dh.shape[-1]

    d_o = dh * tanh_c
    dc_total = dc + dh * o * (1.0 - tanh_c * tanh_c)
    d_f = dc_total * c_prev
    d_i = dc_total * c_hat
    d_c_hat = dc_total * i
    dc_prev = dc_total * f

    pre = {
        "f": d_f * f * (1.0 - f),
        "i": d_i * i * (1.0 - i),
        "C": d_c_hat * (1.0 - c_hat * c_hat),
        "o": d_o * o * (1.0 - o),
    }
    grads = {}
    dz = np.zeros_like(z)
    for gate in GATES:
        grads[f"W_{gate}"] = pre[gate].T @ z
        grads[f"b_{gate}"] = pre[gate].sum(axis=0)
        dz += pre[gate] @ params[f"W_{gate}"]
    return dz[:, hidden:], dz[:, :hidden], dc_prev, grads


class LSTMDirection:
    """One direction of a recurrent layer; zero initial states per sequence."""

    def __init__(
        self,
        store: ParameterStore,
        name: str,
        input_dim: int,
        hidden: int,
        rng: np.random.Generator,
    ):
        self.store = store
        self.name = name
        self.input_dim = input_dim
        self.hidden = hidden
        for gate in GATES:
            weights = np.empty((hidden, hidden + input_dim))
            weights[:, :hidden] = orthogonal(rng, hidden)
            weights[:, hidden:] = fan_in_uniform(rng, hidden + input_dim, (hidden, input_dim))
            store.add(f"{name}.W_{gate}", weights)
            store.add(f"{name}.b_{gate}", np.zeros(hidden))

    def params(self) -> dict[str, np.ndarray]:
        return {
            f"{kind}_{gate}": self.store[f"{self.name}.{kind}_{gate}"]
            for gate in GATES
            for kind in ("W", "b")
        }

    def _order(self, steps: int, reverse: bool) -> range:
        return range(steps - 1, -1, -1) if reverse else range(steps)

    def forward(self, xs: np.ndarray, reverse: bool = False) -> tuple[np.ndarray, list]:
        batch, steps, _ = xs.shape
        params = self.params()
        h = np.zeros((batch, self.hidden))
        c = np.zeros((batch, self.hidden))
        hs = np.empty((batch, steps, self.hidden))
        caches = [None] * steps
        for t in self._order(steps, reverse):
            h, c, caches[t] = lstm_cell(xs[:, t], h, c, params)
            hs[:, t] = h
        return hs, caches

    def backward(self, dhs: np.ndarray, caches: list, reverse: bool = False) -> np.ndarray:
        batch, steps, _ = dhs.shape
        params = self.params()
        dxs = np.empty((batch, steps, self.input_dim))
        dh_next = np.zeros((batch, self.hidden))
        dc_next = np.zeros((batch, self.hidden))
        for t in reversed(list(self._order(steps, reverse))):
            dx, dh_next, dc_next, grads = lstm_cell_backward(
                dhs[:, t] + dh_next, dc_next, caches[t], params
            )
            dxs[:, t] = dx
            for key, value in grads.items():
                self.store.accumulate(f"{self.name}.{key}", value)
        return dxs


class BiLSTMLayer:
    """Forward and backward directions with summed outputs y(t) = h_fwd(t) + h_bwd(t)."""

    def __init__(self, store, name, input_dim, hidden, rng):
        self.forward_cell = LSTMDirection(store, f"{name}.fwd", input_dim, hidden, rng)
        self.backward_cell = LSTMDirection(store, f"{name}.bwd", input_dim, hidden, rng)

    def forward(self, xs: np.ndarray) -> tuple[np.ndarray, tuple]:
        h_fwd, fwd_cache = self.forward_cell.forward(xs, reverse=False)
        h_bwd, bwd_cache = self.backward_cell.forward(xs, reverse=True)
        return h_fwd + h_bwd, (fwd_cache, bwd_cache)

    def backward(self, dys: np.ndarray, cache: tuple) -> np.ndarray:
        fwd_cache, bwd_cache = cache
        return self.forward_cell.backward(dys, fwd_cache, reverse=False) + (
            self.backward_cell.backward(dys, bwd_cache, reverse=True)
        )


class BiLSTMStack:
    """Depth-l Bi-LSTM; each layer consumes the summed output sequence of the one below."""

    def __init__(self, store, name, input_dim, hidden, depth, rng):
        self.layers = [
            BiLSTMLayer(store, f"{name}.{index}", input_dim if index == 0 else hidden, hidden, rng)
            for index in range(depth)
        ]

    def forward(self, xs: np.ndarray) -> tuple[np.ndarray, list]:
        caches = []
        for layer in self.layers:
            xs, cache = layer.forward(xs)
            caches.append(cache)
        return xs, caches

    def backward(self, dys: np.ndarray, caches: list) -> np.ndarray:
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            dys = layer.backward(dys, cache)
        return dys


def bilstm_encode(seq: np.ndarray, stack: BiLSTMStack, residual: Dense) -> np.ndarray:
    """Encoder output y(H) + residual projection of x(H) for a batch of windows (B, H, D)."""
    if seq.ndim != 3 or seq.shape[1] < 1:
        raise DimensionMismatchError("feature sequence", "(B, H>=1, D)", seq.shape)
    ys, _ = stack.forward(seq)
    projected, _ = residual.forward(seq[:, -1])
    return ys[:, -1] + projected
