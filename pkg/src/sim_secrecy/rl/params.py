"""Named parameter arrays with paired gradient storage, plus initializers."""

from __future__ import annotations

import math
from typing import Iterator

import numpy as np

from ..core.exceptions import DimensionMismatchError


class ParameterStore:
    """
    Ordered mapping name -> array, each with a gradient array of the same shape.

    Shapes are fixed once a parameter is added; loads and updates write in place.
    """

    def __init__(self):
        self._values: dict[str, np.ndarray] = {}
        self._grads: dict[str, np.ndarray] = {}

    def add(self, name: str, value: np.ndarray) -> np.ndarray:
        if name in self._values:
            raise KeyError(f"Parameter {name} already exists")
        value = np.array(value, dtype=float)
        self._values[name] = value
        self._grads[name] = np.zeros_like(value)
        return value

    def __getitem__(self, name: str) -> np.ndarray:
        return self._values[name]

    def __contains__(self, name: str) -> bool:
        return name in self._values

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def items(self):
        return self._values.items()

    def grad(self, name: str) -> np.ndarray:
        return self._grads[name]

    def accumulate(self, name: str, gradient: np.ndarray) -> None:
        self._grads[name] += gradient

    def zero_grad(self) -> None:
        for g in self._grads.values():
            g.fill(0.0)

    def set(self, name: str, value: np.ndarray) -> None:
        """Overwrite a parameter in place, keeping its shape."""
        value = np.asarray(value, dtype=float)
        if value.shape != self._values[name].shape:
            raise DimensionMismatchError(name, self._values[name].shape, value.shape)
        self._values[name][...] = value

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: value.copy() for name, value in self._values.items()}

    def load(self, arrays: dict[str, np.ndarray]) -> None:
        missing = set(self._values) - set(arrays)
        if missing:
            raise DimensionMismatchError("parameter set", sorted(self._values), sorted(arrays))
        for name in self._values:
            self.set(name, arrays[name])

    @property
    def num_parameters(self) -> int:
        return sum(value.size for value in self._values.values())

    def grad_norm(self) -> float:
        return math.sqrt(sum(float(np.sum(g * g)) for g in self._grads.values()))

    def clip_grad_norm(self, max_norm: float) -> float:
        """Scale all gradients so their global L2 norm is at most max_norm; return the norm."""
        norm = self.grad_norm()
        if norm > max_norm and math.isfinite(norm):
            scale = max_norm / (norm + 1e-12)
            for g in self._grads.values():
                g *= scale
        return norm


def fan_in_uniform(rng: np.random.Generator, fan_in: int, shape: tuple[int, ...]) -> np.ndarray:
    bound = 1.0 / math.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def orthogonal(rng: np.random.Generator, size: int) -> np.ndarray:
    """Random orthogonal matrix via QR with the sign convention of a Haar draw."""
    q, r = np.linalg.qr(rng.standard_normal((size, size)))
    return q * np.sign(np.diag(r))
