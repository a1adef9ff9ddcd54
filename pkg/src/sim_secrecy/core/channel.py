"""Per-slot stochastic channels: correlated Rician MU->SIM vectors and MU->Eve scalars."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from .em import SimGeometry
from .exceptions import ConfigError, DimensionMismatchError, GeometryError

logger = logging.getLogger(__name__)

EIGENVALUE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PathLossModel:
    """Large-scale gain rho * d^-alpha, rho being the linear gain at 1 m."""

    reference_gain: float
    exponent: float

    def __post_init__(self):
        if self.reference_gain <= 0:
            raise ConfigError(None, f"reference gain must be positive, got {self.reference_gain}")
        if self.exponent < 0:
            raise ConfigError(None, f"path-loss exponent must be >= 0, got {self.exponent}")


@dataclass(frozen=True)
class RicianParams:
    rician_factor: float

    def __post_init__(self):
        if self.rician_factor < 0:
            raise ConfigError(None, f"Rician factor must be >= 0, got {self.rician_factor}")


@dataclass(frozen=True)
class LinkParams:
    """Everything a single link class (SIM link or Eve link) needs to be sampled."""

    path_loss: PathLossModel
    rician: RicianParams


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    matrix: np.ndarray  # R, (N, N) real symmetric
    sampling_root: np.ndarray  # L with L @ L^H ~= R


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Channels of one slot. h_sim has shape (K, N); h_eve has shape (K,)."""

    h_sim: np.ndarray
    h_eve: np.ndarray
    slot: int


def _distance(pos_a, pos_b) -> float:
    d = float(np.linalg.norm(np.asarray(pos_a, dtype=float) - np.asarray(pos_b, dtype=float)))
    if d == 0.0:
        raise GeometryError(f"coincident positions {tuple(pos_a)} and {tuple(pos_b)}")
    return d


def path_loss(pos_a, pos_b, model: PathLossModel) -> float:
    """
    Linear power gain between two 3-D points.

    Raises:
        GeometryError: If the positions coincide
    """
    return model.reference_gain * _distance(pos_a, pos_b) ** (-model.exponent)


def correlation_matrix(geom: SimGeometry) -> CorrelationMatrix:
    """
    Sinc spatial correlation of the output layer and its sampling root.

    The root comes from a symmetric eigen-decomposition with negative eigenvalues
    clamped to zero.
    """
    atoms = geom.atom_positions[-1]
    distances = np.linalg.norm(atoms[:, None, :] - atoms[None, :, :], axis=-1)
    r = np.sinc(2.0 * distances / geom.wavelength)

    eigenvalues, eigenvectors = linalg.eigh(r)
    smallest = float(eigenvalues.min())
    if smallest < -EIGENVALUE_TOLERANCE:
        logger.warning(f"Correlation matrix is indefinite (min eigenvalue {smallest:.3e})")
    root = eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))
    return CorrelationMatrix(matrix=r, sampling_root=root)


def steering_vector(psi_a: float, psi_e: float, geom: SimGeometry) -> np.ndarray:
    """Planar-array LoS response over the output layer, entry 0 is always 1."""
    index = np.arange(geom.atoms_per_layer)
    rows, cols = index // geom.side, index % geom.side
    phase = (
        2.0
        * np.pi
        * (geom.atom_pitch / geom.wavelength)
        * (rows * math.sin(psi_e) * math.sin(psi_a) + cols * math.cos(psi_e))
    )
    return np.exp(1j * phase)


def aoa_from_positions(mu_pos, bs_pos) -> tuple[float, float]:
    """
    Azimuth and elevation of an MU seen from the SIM broadside.

    Returns:
        (psi_a, psi_e) with psi_e = arccos(dz / d) and psi_a = atan2(dy, dx)

    Raises:
        GeometryError: If the positions coincide
    """
    delta = np.asarray(mu_pos, dtype=float) - np.asarray(bs_pos, dtype=float)
    d = _distance(mu_pos, bs_pos)
    psi_e = math.acos(float(np.clip(delta[2] / d, -1.0, 1.0)))
    psi_a = math.atan2(delta[1], delta[0])
    return psi_a, psi_e


def _complex_normal(rng: np.random.Generator, size: int) -> np.ndarray:
    """Standard circularly-symmetric complex normal, unit variance."""
    draws = rng.standard_normal((2, size))
    return (draws[0] + 1j * draws[1]) / math.sqrt(2.0)


def _rician_scale(beta: float, xi: float) -> tuple[float, float]:
    """(overall amplitude, LoS amplitude) for sqrt(beta/(1+xi)) * (sqrt(xi) los + nlos)."""
    return math.sqrt(beta / (1.0 + xi)), math.sqrt(xi)


def sample_sim_channel(
    mu_pos,
    bs_pos,
    geom: SimGeometry,
    params: LinkParams,
    corr: CorrelationMatrix,
    rng: np.random.Generator,
) -> np.ndarray:
    """Correlated Rician channel (N,) from an MU to the last SIM layer."""
    beta = path_loss(mu_pos, bs_pos, params.path_loss)
    psi_a, psi_e = aoa_from_positions(mu_pos, bs_pos)
    los = steering_vector(psi_a, psi_e, geom)
    scattered = corr.sampling_root @ _complex_normal(rng, geom.atoms_per_layer)
    scale, los_gain = _rician_scale(beta, params.rician.rician_factor)
    return scale * (los_gain * los + scattered)


def sample_direct_channel(mu_pos, bs_pos, params: LinkParams, rng: np.random.Generator) -> complex:
    """Rician scalar from an MU to a single BS antenna (N = 1 steering, no SIM)."""
    beta = path_loss(mu_pos, bs_pos, params.path_loss)
    scale, los_gain = _rician_scale(beta, params.rician.rician_factor)
    return complex(scale * (los_gain + _complex_normal(rng, 1)[0]))


def sample_eve_channel(
    mu_pos, eve_pos, wavelength: float, params: LinkParams, rng: np.random.Generator
) -> complex:
    """
    Rician scalar from an MU to the eavesdropper, LoS term exp(-j*2*pi*d/lambda).

    Raises:
        GeometryError: If the positions coincide
    """
    d = _distance(mu_pos, eve_pos)
    beta = params.path_loss.reference_gain * d ** (-params.path_loss.exponent)
    los = np.exp(-1j * 2.0 * np.pi * d / wavelength)
    scale, los_gain = _rician_scale(beta, params.rician.rician_factor)
    return complex(scale * (los_gain * los + _complex_normal(rng, 1)[0]))


def overall_channel(w_k1: np.ndarray, g: np.ndarray, h_sim: np.ndarray) -> complex:
    """
    End-to-end scalar w_k^H G^H h_SIM,k.

    Raises:
        DimensionMismatchError: If the three operands disagree on N
    """
    n = g.shape[0]
    if g.shape != (n, n):
        raise DimensionMismatchError("beamforming matrix", (n, n), g.shape)
    if w_k1.shape != (n,):
        raise DimensionMismatchError("input vector", (n,), w_k1.shape)
    if h_sim.shape != (n,):
        raise DimensionMismatchError("SIM channel", (n,), h_sim.shape)
    return complex(np.vdot(w_k1, g.conj().T @ h_sim))


class ChannelModel:
    """
    Samples a ChannelRealization per slot for every MU.

    With no geometry the model runs without a SIM: each MU gets a direct Rician
    scalar to its own BS antenna, stored as an (K, 1) h_sim.
    """

    def __init__(
        self,
        sim_link: LinkParams,
        eve_link: LinkParams,
        bs_position,
        eve_position,
        wavelength: float,
        geometry: Optional[SimGeometry] = None,
    ):
        self.sim_link = sim_link
        self.eve_link = eve_link
        self.bs_position = np.asarray(bs_position, dtype=float)
        self.eve_position = np.asarray(eve_position, dtype=float)
        self.wavelength = wavelength
        self.geometry = geometry
        self.correlation = correlation_matrix(geometry) if geometry is not None else None

    @classmethod
    def from_scenario(cls, scenario, geometry: Optional[SimGeometry] = None) -> "ChannelModel":
        """Build from a ScenarioConfig, applying one exponent to both links unless overridden."""
        sim_link = LinkParams(
            PathLossModel(scenario.reference_gain, scenario.path_loss_exponent),
            RicianParams(scenario.rician_factor),
        )
        eve_link = LinkParams(
            PathLossModel(scenario.reference_gain, scenario.eve_exponent),
            RicianParams(scenario.eve_rician_factor),
        )
        return cls(
            sim_link,
            eve_link,
            scenario.bs_position,
            scenario.eve_position,
            scenario.wavelength,
            geometry,
        )

    @property
    def uses_sim(self) -> bool:
        return self.geometry is not None

    def sample(
        self, mu_positions: np.ndarray, slot: int, rng: np.random.Generator
    ) -> ChannelRealization:
        """
        Draw fresh channels for MU positions given as (K, 2) ground coordinates.

        Draw order is fixed per MU (legitimate link, then Eve link) so identical
        seeds give bit-identical realizations.
        """
        mu_positions = np.asarray(mu_positions, dtype=float)
        k_count = mu_positions.shape[0]
        width = self.geometry.atoms_per_layer if self.uses_sim else 1
        h_sim = np.empty((k_count, width), dtype=complex)
        h_eve = np.empty(k_count, dtype=complex)

        for k in range(k_count):
            mu = np.array([mu_positions[k, 0], mu_positions[k, 1], 0.0])
            if self.uses_sim:
                h_sim[k] = sample_sim_channel(
                    mu, self.bs_position, self.geometry, self.sim_link, self.correlation, rng
                )
            else:
                h_sim[k, 0] = sample_direct_channel(mu, self.bs_position, self.sim_link, rng)
            h_eve[k] = sample_eve_channel(
                mu, self.eve_position, self.wavelength, self.eve_link, rng
            )

        return ChannelRealization(h_sim=h_sim, h_eve=h_eve, slot=slot)
