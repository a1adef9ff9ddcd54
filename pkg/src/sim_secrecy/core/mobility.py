"""Biased random-walk mobility with mirror reflection at the service-area edges."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import GeometryError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Bounds:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    @classmethod
    def square(cls, side: float, center: tuple[float, float] = (0.0, 0.0)) -> "Bounds":
        half = side / 2.0
        return cls(center[0] - half, center[0] + half, center[1] - half, center[1] + half)

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


@dataclass(frozen=True)
class MuKinematics:
    """Ground position (z = 0), headings in radians and speed in m/s of one MU."""

    x: float
    y: float
    reference_heading: float
    heading: float
    speed: float = 0.0

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, 0.0])


def _reflect(value: float, low: float, high: float) -> tuple[float, bool]:
    """Fold a coordinate back into [low, high]; report whether any fold happened."""
    reflected = False
    while value < low or value > high:
        value = 2.0 * low - value if value < low else 2.0 * high - value
        reflected = not reflected
    return value, reflected


def advance(
    kin: MuKinematics, heading: float, speed: float, dt: float, bounds: Bounds
) -> MuKinematics:
    """
    Move an MU with a given heading and speed for one slot.

    Positions leaving the area are mirrored back inside. A fold across an x edge
    maps headings to pi - theta, one across a y edge maps them to -theta; the
    reference heading is reflected with them so the walk keeps its trend away
    from the wall.
    """
    if dt <= 0:
        raise GeometryError(f"slot duration must be positive, got {dt}")

    x, flip_x = _reflect(kin.x + speed * dt * math.cos(heading), bounds.x_min, bounds.x_max)
    y, flip_y = _reflect(kin.y + speed * dt * math.sin(heading), bounds.y_min, bounds.y_max)

    reference = kin.reference_heading
    if flip_x:
        heading, reference = math.pi - heading, math.pi - reference
    if flip_y:
        heading, reference = -heading, -reference

    return replace(
        kin,
        x=x,
        y=y,
        heading=heading % TWO_PI,
        reference_heading=reference % TWO_PI,
        speed=speed,
    )


def step_mobility(
    kin: MuKinematics,
    dt: float,
    heading_perturbation: float,
    max_velocity: float,
    bounds: Bounds,
    rng: np.random.Generator,
) -> MuKinematics:
    """
    One slot of the biased random walk.

    theta = theta_fix + U(-dTheta, dTheta), v = U(0, V_max). Both draws happen on
    every call so the random stream advances identically whatever the parameters.
    """
    heading = kin.reference_heading + rng.uniform(-heading_perturbation, heading_perturbation)
    speed = rng.uniform(0.0, max_velocity)
    return advance(kin, heading, speed, dt, bounds)


def initial_kinematics(bounds: Bounds, rng: np.random.Generator) -> MuKinematics:
    """Uniform position over the area and a uniform reference heading in [0, 2*pi)."""
    x = rng.uniform(bounds.x_min, bounds.x_max)
    y = rng.uniform(bounds.y_min, bounds.y_max)
    theta_fix = rng.uniform(0.0, TWO_PI)
    return MuKinematics(x=x, y=y, reference_heading=theta_fix, heading=theta_fix)
