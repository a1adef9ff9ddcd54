"""Wave-domain SIM model: geometry, phase matrices, diffraction and the cascaded beamformer.

Coordinates are local to the SIM: the antenna array sits in the z = 0 plane and
layer m (1-based, layer 1 facing the antennas) sits at z = m * d_Layer. Every layer
is a sqrt(N) x sqrt(N) grid centered on the z-axis.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import DimensionMismatchError, GeometryError, LayerIndexError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class SimGeometry:
    """Full 3-D layout of the SIM layers, meta-atoms and BS antennas (meters)."""

    layers: int
    atoms_per_layer: int
    wavelength: float
    atom_pitch: float
    atom_size: tuple[float, float]
    layer_spacing: float
    antenna_positions: np.ndarray  # (K, 3)
    atom_positions: np.ndarray  # (M, N, 3)

    @property
    def side(self) -> int:
        return math.isqrt(self.atoms_per_layer)

    @property
    def num_antennas(self) -> int:
        return self.antenna_positions.shape[0]

    @property
    def atom_area(self) -> float:
        return self.atom_size[0] * self.atom_size[1]

    def layer_atoms(self, layer: int) -> np.ndarray:
        """Atom positions (N, 3) of a 1-based layer."""
        _check_layer(layer, self.layers)
        return self.atom_positions[layer - 1]


def build_geometry(
    layers: int,
    atoms_per_layer: int,
    wavelength: float,
    num_antennas: int,
    thickness_wavelengths: float = 5.0,
) -> SimGeometry:
    """
    Lay out a SIM with half-wavelength atoms and a half-wavelength antenna ULA.

    Args:
        layers: Number of metasurface layers M
        atoms_per_layer: Meta-atoms per layer N (perfect square)
        wavelength: Carrier wavelength (m)
        num_antennas: BS antennas (one per MU)
        thickness_wavelengths: SIM thickness in wavelengths; d_Layer = T_SIM / M

    Returns:
        SimGeometry with every position filled in

    Raises:
        GeometryError: If N is not a perfect square or a count is not positive
    """
    side = math.isqrt(atoms_per_layer)
    if side * side != atoms_per_layer:
        raise GeometryError(f"atoms_per_layer={atoms_per_layer} is not a perfect square")
    if layers < 1 or num_antennas < 1 or wavelength <= 0:
        raise GeometryError(
            f"layers={layers}, num_antennas={num_antennas}, wavelength={wavelength}"
        )

    pitch = wavelength / 2.0
    layer_spacing = thickness_wavelengths * wavelength / layers

    # n = row * side + col, rows along y and columns along x
    index = np.arange(atoms_per_layer)
    rows, cols = index // side, index % side
    offset = (side - 1) / 2.0
    xy = np.stack([(cols - offset) * pitch, (rows - offset) * pitch], axis=1)

    atoms = np.empty((layers, atoms_per_layer, 3))
    for m in range(layers):
        atoms[m, :, :2] = xy
        atoms[m, :, 2] = (m + 1) * layer_spacing

    antennas = np.zeros((num_antennas, 3))
    antennas[:, 0] = (np.arange(num_antennas) - (num_antennas - 1) / 2.0) * pitch

    return SimGeometry(
        layers=layers,
        atoms_per_layer=atoms_per_layer,
        wavelength=wavelength,
        atom_pitch=pitch,
        atom_size=(pitch, pitch),
        layer_spacing=layer_spacing,
        antenna_positions=antennas,
        atom_positions=atoms,
    )


@dataclass(frozen=True, eq=False)
class PhaseConfig:
    """Per-atom phase shifts phi_m^n in [0, 2*pi), shape (M, N)."""

    phases: np.ndarray

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=float)
        if phases.ndim != 2:
            raise DimensionMismatchError("phases", "(M, N)", phases.shape)
        if not np.all(np.isfinite(phases)) or np.any(phases < 0) or np.any(phases >= TWO_PI):
            raise GeometryError("phase shifts must be finite and lie in [0, 2*pi)")
        object.__setattr__(self, "phases", phases)

    @property
    def layers(self) -> int:
        return self.phases.shape[0]

    @property
    def atoms_per_layer(self) -> int:
        return self.phases.shape[1]

    @classmethod
    def uniform(cls, layers: int, atoms_per_layer: int, value: float = np.pi) -> "PhaseConfig":
        return cls.wrapped(np.full((layers, atoms_per_layer), value))

    @classmethod
    def wrapped(cls, raw: np.ndarray) -> "PhaseConfig":
        """Wrap arbitrary real phases into [0, 2*pi)."""
        phases = np.mod(np.asarray(raw, dtype=float), TWO_PI)
        # np.mod can round tiny negatives up to exactly 2*pi
        phases[phases >= TWO_PI] = 0.0
        return cls(phases)


def _check_layer(layer: int, layers: int) -> None:
    if not 1 <= layer <= layers:
        raise LayerIndexError(layer, layers)


def phase_matrix(config: PhaseConfig, layer: int) -> np.ndarray:
    """Diagonal N x N matrix diag(exp(j*phi_m^n)) for a 1-based layer."""
    _check_layer(layer, config.layers)
    return np.diag(np.exp(1j * config.phases[layer - 1]))


def _diffraction(
    source: np.ndarray, target: np.ndarray, wavelength: float, atom_area: float
) -> np.ndarray:
    """Vectorized diffraction coefficient over broadcast point arrays (..., 3)."""
    delta = np.asarray(target, dtype=float) - np.asarray(source, dtype=float)
    distance = np.linalg.norm(delta, axis=-1)
    normal = np.abs(delta[..., 2])
    if np.any(distance == 0.0):
        raise GeometryError("coincident source and target points")
    if np.any(normal == 0.0):
        raise GeometryError("source and target lie on the same plane")

    cos_chi = normal / distance
    return (
        atom_area
        * cos_chi
        / distance
        * (1.0 / (TWO_PI * distance) - 1j / wavelength)
        * np.exp(1j * TWO_PI * distance / wavelength)
    )


def diffraction_coefficient(geom: SimGeometry, source_point, target_point) -> complex:
    """
    Diffraction coefficient between two points on parallel planes.

    cos(chi) is the normal separation of the planes over the point distance.

    Raises:
        GeometryError: If the points coincide or share a plane
    """
    value = _diffraction(
        np.asarray(source_point), np.asarray(target_point), geom.wavelength, geom.atom_area
    )
    return complex(value)


def propagation_matrix(geom: SimGeometry, layer: int) -> np.ndarray:
    """
    Transmission matrix W_m from layer m-1 to layer m.

    Entry (n', n) is the coefficient between atom n' of layer m-1 and atom n of layer m.

    Raises:
        LayerIndexError: Unless 2 <= layer <= M
    """
    if not 2 <= layer <= geom.layers:
        raise LayerIndexError(layer, geom.layers)
    source = geom.atom_positions[layer - 2]
    target = geom.atom_positions[layer - 1]
    return _diffraction(source[:, None, :], target[None, :, :], geom.wavelength, geom.atom_area)


def input_vector(geom: SimGeometry, antenna: int) -> np.ndarray:
    """
    Transmission vector w_k^1 from BS antenna k (0-based) to every atom of layer 1.

    Raises:
        GeometryError: If the index is invalid or the antenna lies on the layer plane
    """
    if not 0 <= antenna < geom.num_antennas:
        raise GeometryError(f"antenna index {antenna} outside 0..{geom.num_antennas - 1}")
    source = geom.antenna_positions[antenna]
    return _diffraction(source[None, :], geom.atom_positions[0], geom.wavelength, geom.atom_area)


def beamforming_matrix(
    geom: SimGeometry,
    config: PhaseConfig,
    propagation: Optional[list[np.ndarray]] = None,
) -> np.ndarray:
    """
    Cascaded wave-based beamformer G = Phi_M W_M ... Phi_2 W_2 Phi_1.

    Args:
        geom: SIM geometry
        config: Phase configuration with the same (M, N)
        propagation: Precomputed [W_2, ..., W_M]; built from geom when omitted

    Raises:
        DimensionMismatchError: If config and geometry disagree on (M, N)
    """
    expected = (geom.layers, geom.atoms_per_layer)
    if config.phases.shape != expected:
        raise DimensionMismatchError("phase config", expected, config.phases.shape)
    if propagation is None:
        propagation = [propagation_matrix(geom, m) for m in range(2, geom.layers + 1)]

    diagonals = np.exp(1j * config.phases)
    g = np.diag(diagonals[0])
    for m in range(2, geom.layers + 1):
        # Phi_m @ (W_m @ G) without materializing Phi_m
        g = diagonals[m - 1][:, None] * (propagation[m - 2] @ g)
    return g


@dataclass(eq=False)
class StackedMetasurface:
    """Geometry plus its phase-independent transmission operators, built once."""

    geometry: SimGeometry
    propagation: list[np.ndarray] = field(init=False)
    input_vectors: np.ndarray = field(init=False)  # (K, N), row k is w_k^1

    def __post_init__(self):
        geom = self.geometry
        self.propagation = [propagation_matrix(geom, m) for m in range(2, geom.layers + 1)]
        self.input_vectors = np.stack(
            [input_vector(geom, k) for k in range(geom.num_antennas)]
        )
        logger.debug(
            f"Built SIM operators (M={geom.layers}, N={geom.atoms_per_layer}, "
            f"d_Layer={geom.layer_spacing:.4f} m)"
        )

    def beamforming(self, config: PhaseConfig) -> np.ndarray:
        return beamforming_matrix(self.geometry, config, self.propagation)
