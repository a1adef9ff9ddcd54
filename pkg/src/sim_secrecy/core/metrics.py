"""SINRs with residual hardware impairments, rates and secrecy rates."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import ChannelRealization
from .exceptions import DimensionMismatchError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LinkSnapshot:
    """Linear gains, transmit powers (W), RHI levels and noise power (W) of one slot."""

    gains: np.ndarray  # g_k = |w_k^H G^H h_SIM,k|^2
    eve_gains: np.ndarray  # e_k = |h_Eve,k|^2
    powers: np.ndarray
    rhi: np.ndarray  # kappa_k
    noise_power: float

    def __post_init__(self):
        k = len(self.powers)
        for name in ("gains", "eve_gains", "rhi"):
            value = getattr(self, name)
            if len(value) != k:
                raise DimensionMismatchError(name, k, len(value))


@dataclass(frozen=True, eq=False)
class SecrecyReport:
    sinr: np.ndarray
    eve_sinr: np.ndarray
    rates: np.ndarray
    eve_rates: np.ndarray
    secrecy: np.ndarray

    @property
    def mean_secrecy(self) -> float:
        return float(np.mean(self.secrecy))

    @property
    def sum_secrecy(self) -> float:
        return float(np.sum(self.secrecy))

    @property
    def min_secrecy(self) -> float:
        return float(np.min(self.secrecy))


def _sinr(gains: np.ndarray, powers: np.ndarray, rhi: np.ndarray, noise: float) -> np.ndarray:
    """gP / (sum_{j!=k} g_j P_j + sum_i g_i kappa_i^2 P_i + N0), zero where gP is zero."""
    received = np.asarray(gains, dtype=float) * np.asarray(powers, dtype=float)
    distortion = np.sum(received * np.asarray(rhi, dtype=float) ** 2)
    interference = np.array([np.sum(np.delete(received, k)) for k in range(len(received))])
    denominator = interference + distortion + noise
    out = np.zeros_like(received)
    np.divide(received, denominator, out=out, where=received > 0)
    return out


def sinr_bs(snapshot: LinkSnapshot, k: int) -> float:
    """SINR of MU k at the BS; the impairment sum includes MU k itself."""
    return float(_sinr(snapshot.gains, snapshot.powers, snapshot.rhi, snapshot.noise_power)[k])


def sinr_eve(snapshot: LinkSnapshot, k: int) -> float:
    return float(
        _sinr(snapshot.eve_gains, snapshot.powers, snapshot.rhi, snapshot.noise_power)[k]
    )


def rate(gamma):
    """log2(1 + gamma) in bit/s/Hz; works on scalars and arrays."""
    return np.log1p(gamma) / np.log(2.0)


def secrecy_rate(rate_k, eve_rate_k):
    return np.maximum(np.asarray(rate_k) - np.asarray(eve_rate_k), 0.0)


def effective_gains(
    g: Optional[np.ndarray], input_vectors: Optional[np.ndarray], h_sim: np.ndarray
) -> np.ndarray:
    """
    Per-MU power gains |w_k^H G^H h_k|^2, MU k served by antenna k.

    With no beamformer (g is None) h_sim holds one direct scalar per MU.
    """
    if g is None:
        return np.abs(h_sim[:, 0]) ** 2
    if input_vectors.shape != h_sim.shape:
        raise DimensionMismatchError("input vectors", h_sim.shape, input_vectors.shape)
    projected = h_sim @ g.conj()  # row k is (G^H h_k)^T
    return np.abs(np.sum(input_vectors.conj() * projected, axis=1)) ** 2


def snapshot_from(
    channels: ChannelRealization,
    powers: np.ndarray,
    rhi_level: float,
    noise_power: float,
    g: Optional[np.ndarray] = None,
    input_vectors: Optional[np.ndarray] = None,
) -> LinkSnapshot:
    powers = np.asarray(powers, dtype=float)
    return LinkSnapshot(
        gains=effective_gains(g, input_vectors, channels.h_sim),
        eve_gains=np.abs(channels.h_eve) ** 2,
        powers=powers,
        rhi=np.full(len(powers), rhi_level),
        noise_power=noise_power,
    )


def report_from_snapshot(snapshot: LinkSnapshot) -> SecrecyReport:
    sinr = _sinr(snapshot.gains, snapshot.powers, snapshot.rhi, snapshot.noise_power)
    eve_sinr = _sinr(snapshot.eve_gains, snapshot.powers, snapshot.rhi, snapshot.noise_power)
    rates = rate(sinr)
    eve_rates = rate(eve_sinr)
    return SecrecyReport(
        sinr=sinr,
        eve_sinr=eve_sinr,
        rates=rates,
        eve_rates=eve_rates,
        secrecy=secrecy_rate(rates, eve_rates),
    )


def secrecy_report(
    g: Optional[np.ndarray],
    channels: ChannelRealization,
    powers: np.ndarray,
    scenario,
    input_vectors: Optional[np.ndarray] = None,
) -> SecrecyReport:
    """
    Full per-user and aggregate secrecy metrics for one slot.

    Args:
        g: Beamforming matrix, or None when the uplink has no SIM
        channels: Slot channels
        powers: Transmit powers in watts, one per MU
        scenario: ScenarioConfig supplying the RHI level and noise power
        input_vectors: (K, N) antenna-to-layer-1 vectors, required with a SIM

    Raises:
        DimensionMismatchError: If channel, power and vector sizes disagree
    """
    if len(powers) != channels.h_sim.shape[0]:
        raise DimensionMismatchError("powers", channels.h_sim.shape[0], len(powers))
    snapshot = snapshot_from(
        channels, powers, scenario.rhi_level, scenario.noise_power_w, g, input_vectors
    )
    return report_from_snapshot(snapshot)
