"""
Episodic MDP over the SIM uplink.

State (length 4K + 1): MU ground positions, per-user secrecy rates, per-user BS
SINRs and the mean secrecy rate. Action (length M*N + K) in [-1, 1]: phase shifts
followed by transmit powers.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from .channel import ChannelModel, ChannelRealization
from .em import PhaseConfig, StackedMetasurface, build_geometry
from .exceptions import DimensionMismatchError, SimSecrecyError
from .metrics import SecrecyReport, secrecy_report
from .mobility import Bounds, MuKinematics, initial_kinematics, step_mobility

if TYPE_CHECKING:
    from ..config import RewardConfig, ScenarioConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RewardBreakdown:
    increment: float  # r_diff
    progression: float  # r_pro
    stability: float  # r_sta
    feasible: bool
    total: float


@dataclass(frozen=True, eq=False)
class StepResult:
    state: np.ndarray
    reward: float
    done: bool
    report: SecrecyReport
    breakdown: RewardBreakdown


@dataclass(eq=False)
class Transition:
    """One replay record. Windows are scaled observations of shape (H, 4K + 1)."""

    window: np.ndarray
    action: np.ndarray  # pre-clip sample
    reward: float
    next_window: np.ndarray
    done: bool
    log_prob: float  # behavior log-density of action
    policy_version: int


def decode_action(
    action: np.ndarray, layers: int, atoms_per_layer: int, num_users: int, max_power: float
) -> tuple[PhaseConfig, np.ndarray]:
    """
    Map a normalized action to a phase configuration and transmit powers.

    Entries are clipped to [-1, 1]; phases are (x + 1) * pi wrapped into [0, 2*pi)
    and powers are (x + 1) / 2 * P_max.

    Raises:
        DimensionMismatchError: If the action length is not M*N + K
    """
    action = np.asarray(action, dtype=float)
    expected = layers * atoms_per_layer + num_users
    if action.shape != (expected,):
        raise DimensionMismatchError("action", (expected,), action.shape)

    clipped = np.clip(action, -1.0, 1.0)
    split = layers * atoms_per_layer
    phases = PhaseConfig.wrapped(((clipped[:split] + 1.0) * np.pi).reshape(layers, atoms_per_layer))
    powers = (clipped[split:] + 1.0) / 2.0 * max_power
    return phases, powers


def reward_breakdown(
    prev: SecrecyReport, nxt: SecrecyReport, cfg: "RewardConfig", min_secrecy_rate: float
) -> RewardBreakdown:
    """
    Composite reward between consecutive slots.

    When any user falls below R_min the progression term and a positive increment
    term are zeroed; the stability penalty always applies.
    """
    delta = nxt.mean_secrecy - prev.mean_secrecy
    increment = delta
    progression = 1.0 - math.exp(-nxt.mean_secrecy)
    stability = abs(delta) if abs(delta) > cfg.stability_band else 0.0
    feasible = nxt.min_secrecy >= min_secrecy_rate

    diff_term = cfg.gain_diff * increment
    pro_term = cfg.gain_pro * progression
    if not feasible:
        diff_term = min(diff_term, 0.0)
        pro_term = 0.0

    total = diff_term + pro_term - cfg.gain_sta * stability
    return RewardBreakdown(increment, progression, stability, feasible, total)


def compute_reward(
    prev: SecrecyReport, nxt: SecrecyReport, cfg: "RewardConfig", min_secrecy_rate: float
) -> float:
    return reward_breakdown(prev, nxt, cfg, min_secrecy_rate).total


def state_vector(positions: np.ndarray, report: SecrecyReport) -> np.ndarray:
    return np.concatenate(
        [
            np.asarray(positions, dtype=float).ravel(),
            report.secrecy,
            report.sinr,
            [report.mean_secrecy],
        ]
    )


@dataclass(frozen=True)
class ObservationScaler:
    """Brings raw states to unit scale for the networks."""

    num_users: int
    center: tuple[float, float]
    half_extent: float
    rate_scale: float = 10.0

    def __call__(self, state: np.ndarray) -> np.ndarray:
        k = self.num_users
        positions = (state[: 2 * k].reshape(k, 2) - np.asarray(self.center)) / self.half_extent
        secrecy = state[2 * k : 3 * k] / self.rate_scale
        sinr = np.log1p(state[3 * k : 4 * k]) / self.rate_scale
        mean = state[4 * k :] / self.rate_scale
        return np.concatenate([positions.ravel(), secrecy, sinr, mean])


class StateWindow:
    """Sliding window of the last H scaled observations, padded with the first one."""

    def __init__(self, length: int):
        self.length = length
        self._items: deque[np.ndarray] = deque(maxlen=length)

    def reset(self, observation: np.ndarray) -> np.ndarray:
        self._items.clear()
        for _ in range(self.length):
            self._items.append(observation)
        return self.array()

    def push(self, observation: np.ndarray) -> np.ndarray:
        self._items.append(observation)
        return self.array()

    def array(self) -> np.ndarray:
        return np.stack(self._items)


class SecureUplinkEnv:
    """
    SIM-assisted uplink with moving MUs and a fixed eavesdropper.

    Each step advances mobility, redraws channels for the new slot and applies the
    action to that slot; the resulting report defines the reward. Random draws do
    not depend on the action, so different policies see identical channel sequences
    under the same seed.
    """

    def __init__(
        self,
        scenario: "ScenarioConfig",
        rng: Optional[np.random.Generator] = None,
        seed: Optional[int] = None,
        use_sim: bool = True,
    ):
        self.scenario = scenario
        self.rng = rng if rng is not None else np.random.default_rng(seed)
        self.use_sim = use_sim
        bs_xy = (scenario.bs_position[0], scenario.bs_position[1])
        self.bounds = Bounds.square(scenario.area_size, center=bs_xy)

        if use_sim:
            self.geometry = build_geometry(
                scenario.layers,
                scenario.atoms_per_layer,
                scenario.wavelength,
                scenario.num_users,
                scenario.sim_thickness_wavelengths,
            )
            self.surface: Optional[StackedMetasurface] = StackedMetasurface(self.geometry)
        else:
            self.geometry = None
            self.surface = None

        self.channel_model = ChannelModel.from_scenario(scenario, self.geometry)
        self.scaler = ObservationScaler(scenario.num_users, bs_xy, scenario.area_size / 2.0)

        self.kinematics: list[MuKinematics] = []
        self.channels: Optional[ChannelRealization] = None
        self.report: Optional[SecrecyReport] = None
        self.state: Optional[np.ndarray] = None
        self.slot = 0
        self.record_trace = False
        self.trace: list[dict] = []

    @property
    def action_dim(self) -> int:
        return self.scenario.action_dim

    @property
    def state_dim(self) -> int:
        return self.scenario.state_dim

    @property
    def max_power(self) -> float:
        return self.scenario.max_power_w

    def positions(self) -> np.ndarray:
        return np.array([[kin.x, kin.y] for kin in self.kinematics])

    def decode(self, action: np.ndarray) -> tuple[Optional[PhaseConfig], np.ndarray]:
        s = self.scenario
        phases, powers = decode_action(
            action, s.layers, s.atoms_per_layer, s.num_users, s.max_power_w
        )
        return (phases if self.use_sim else None), powers

    def evaluate(self, phases: Optional[PhaseConfig], powers: np.ndarray) -> SecrecyReport:
        """Secrecy report for a configuration on the current slot's channels."""
        if self.channels is None:
            raise SimSecrecyError("reset() must be called before evaluating configurations")
        if self.surface is None:
            return secrecy_report(None, self.channels, powers, self.scenario)
        g = self.surface.beamforming(phases)
        return secrecy_report(g, self.channels, powers, self.scenario, self.surface.input_vectors)

    def reset(self) -> np.ndarray:
        """Fresh kinematics and channels; s_0 metrics use phases pi and powers P_max/2."""
        s = self.scenario
        self.kinematics = [initial_kinematics(self.bounds, self.rng) for _ in range(s.num_users)]
        self.slot = 0
        self.trace = []
        self.channels = self.channel_model.sample(self.positions(), self.slot, self.rng)

        phases = PhaseConfig.uniform(s.layers, s.atoms_per_layer, np.pi) if self.use_sim else None
        self.report = self.evaluate(phases, np.full(s.num_users, s.max_power_w / 2.0))
        self.state = state_vector(self.positions(), self.report)
        return self.state.copy()

    def step(self, action: np.ndarray) -> StepResult:
        phases, powers = self.decode(action)
        return self.step_configuration(phases, powers)

    def step_configuration(self, phases: Optional[PhaseConfig], powers: np.ndarray) -> StepResult:
        """Step with an explicit configuration instead of a normalized action."""
        self._advance()
        return self._finish(self.evaluate(phases, powers), powers)

    def step_best_of(
        self, candidates: Sequence[tuple[Optional[PhaseConfig], np.ndarray]]
    ) -> tuple[StepResult, int]:
        """Advance one slot and keep the candidate with the highest sum secrecy rate."""
        if not candidates:
            raise SimSecrecyError("step_best_of needs at least one candidate")
        self._advance()
        reports = [self.evaluate(phases, powers) for phases, powers in candidates]
        best = int(np.argmax([r.sum_secrecy for r in reports]))
        return self._finish(reports[best], candidates[best][1]), best

    def _advance(self) -> None:
        if self.report is None:
            raise SimSecrecyError("reset() must be called before step()")
        s = self.scenario
        self.slot += 1
        self.kinematics = [
            step_mobility(
                kin, s.slot_duration, s.heading_perturbation, s.max_velocity, self.bounds, self.rng
            )
            for kin in self.kinematics
        ]
        self.channels = self.channel_model.sample(self.positions(), self.slot, self.rng)

    def _finish(self, report: SecrecyReport, powers: np.ndarray) -> StepResult:
        s = self.scenario
        breakdown = reward_breakdown(self.report, report, s.reward, s.min_secrecy_rate)
        self.report = report
        self.state = state_vector(self.positions(), report)
        done = self.slot >= s.slots_per_episode

        if self.record_trace:
            self.trace.append(
                {
                    "slot": self.slot,
                    "positions": self.positions().tolist(),
                    "powers": np.asarray(powers, dtype=float).tolist(),
                    "secrecy": report.secrecy.tolist(),
                    "mean_secrecy": report.mean_secrecy,
                    "reward": breakdown.total,
                }
            )
        return StepResult(self.state.copy(), breakdown.total, done, report, breakdown)
