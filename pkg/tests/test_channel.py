"""Unit tests for path loss, correlation and Rician channel sampling."""

import math

import numpy as np
import pytest
from scipy import stats

from sim_secrecy.core.channel import (
    ChannelModel,
    LinkParams,
    PathLossModel,
    RicianParams,
    aoa_from_positions,
    correlation_matrix,
    overall_channel,
    path_loss,
    sample_eve_channel,
    sample_sim_channel,
    steering_vector,
)
from sim_secrecy.core.em import build_geometry, input_vector
from sim_secrecy.core.exceptions import ConfigError, DimensionMismatchError, GeometryError


@pytest.fixture
def link():
    return LinkParams(PathLossModel(1e-2, 2.0), RicianParams(10.0))


class TestPathLoss:
    """Tests for the large-scale gain."""

    def test_inverse_power_law(self):
        """Should give rho * d^-alpha."""
        model = PathLossModel(1e-2, 2.0)

        assert path_loss((0, 0, 0), (10, 0, 0), model) == pytest.approx(1e-4)
        assert path_loss((0, 0, 0), (0, 3, 4), PathLossModel(1.0, 3.0)) == pytest.approx(1 / 125)

    def test_coincident_positions(self):
        """Should raise GeometryError when the points coincide."""
        with pytest.raises(GeometryError):
            path_loss((1, 2, 3), (1, 2, 3), PathLossModel(1e-2, 2.0))

    def test_invalid_parameters(self):
        """Should reject a negative exponent and a non-positive reference gain."""
        with pytest.raises(ConfigError):
            PathLossModel(1e-2, -1.0)
        with pytest.raises(ConfigError):
            PathLossModel(0.0, 2.0)
        with pytest.raises(ConfigError):
            RicianParams(-1.0)


class TestCorrelation:
    """Tests for the spatial correlation of the output layer."""

    def test_unit_diagonal_and_symmetric(self, geometry):
        """Should be a symmetric matrix with ones on the diagonal."""
        corr = correlation_matrix(geometry)

        assert np.allclose(np.diag(corr.matrix), 1.0)
        assert np.allclose(corr.matrix, corr.matrix.T)

    def test_half_wavelength_neighbours_uncorrelated(self, geometry):
        """Should give sinc(1) = 0 between atoms half a wavelength apart."""
        corr = correlation_matrix(geometry)

        assert corr.matrix[0, 1] == pytest.approx(0.0, abs=1e-12)

    def test_root_reproduces_clamped_spectrum(self, scenario):
        """Should give L L^T equal to R with negative eigenvalues set to zero."""
        geometry = build_geometry(1, 36, scenario.wavelength, 2)
        corr = correlation_matrix(geometry)

        eigenvalues, eigenvectors = np.linalg.eigh(corr.matrix)
        clamped = (eigenvectors * np.clip(eigenvalues, 0.0, None)) @ eigenvectors.T
        product = corr.sampling_root @ corr.sampling_root.conj().T

        assert np.allclose(product, clamped, atol=1e-10)
        assert np.linalg.eigvalsh(product).min() > -1e-10


class TestSteering:
    """Tests for the LoS response and angles of arrival."""

    def test_first_entry_is_one(self, geometry):
        """Should be unit modulus everywhere with entry 0 equal to 1."""
        a = steering_vector(0.3, 1.1, geometry)

        assert a[0] == pytest.approx(1.0)
        assert np.allclose(np.abs(a), 1.0)

    def test_angles(self):
        """Should return azimuth atan2(dy, dx) and elevation arccos(dz / d)."""
        psi_a, psi_e = aoa_from_positions((10.0, 0.0, 0.0), (0.0, 0.0, 20.0))

        assert psi_a == pytest.approx(0.0)
        assert psi_e == pytest.approx(math.acos(-20.0 / math.sqrt(500.0)))


class TestSampling:
    """Statistical tests of the sampled channels."""

    def test_eve_amplitude_is_rice_distributed(self, link, rng):
        """Should produce Rice-distributed magnitudes with mean power beta."""
        mu, eve = np.array([10.0, 0.0, 0.0]), np.array([0.0, 0.0, 0.0])
        samples = np.array(
            [sample_eve_channel(mu, eve, 0.1, link, rng) for _ in range(4000)]
        )
        beta = 1e-4
        xi = 10.0
        scale = math.sqrt(beta / (1 + xi)) / math.sqrt(2.0)

        _, p_value = stats.kstest(
            np.abs(samples), stats.rice(b=math.sqrt(xi) * math.sqrt(2.0), scale=scale).cdf
        )

        assert p_value > 1e-3
        assert np.mean(np.abs(samples) ** 2) == pytest.approx(beta, rel=0.05)

    def test_sim_channel_mean_and_covariance(self, geometry, link, rng):
        """Should have the LoS mean and the correlated scattered covariance."""
        mu, bs = np.array([10.0, 5.0, 0.0]), np.array([0.0, 0.0, 20.0])
        corr = correlation_matrix(geometry)
        draws = np.array(
            [sample_sim_channel(mu, bs, geometry, link, corr, rng) for _ in range(6000)]
        )

        beta = path_loss(mu, bs, link.path_loss)
        amplitude = math.sqrt(beta / 11.0)
        los = steering_vector(*aoa_from_positions(mu, bs), geometry)
        mean = amplitude * math.sqrt(10.0) * los
        centered = draws - mean
        covariance = centered.T @ centered.conj() / len(draws)

        assert np.allclose(draws.mean(axis=0), mean, atol=0.1 * amplitude)
        assert np.allclose(covariance, amplitude**2 * corr.matrix, atol=0.1 * amplitude**2)


class TestChannelModel:
    """Tests for per-slot sampling."""

    def test_shapes_with_and_without_sim(self, scenario, geometry, rng):
        """Should give (K, N) SIM channels, or one direct scalar per user without a SIM."""
        positions = np.array([[10.0, 5.0], [-20.0, 3.0]])

        with_sim = ChannelModel.from_scenario(scenario, geometry).sample(positions, 1, rng)
        direct = ChannelModel.from_scenario(scenario).sample(positions, 1, rng)

        assert with_sim.h_sim.shape == (2, geometry.atoms_per_layer)
        assert with_sim.h_eve.shape == (2,)
        assert direct.h_sim.shape == (2, 1)
        assert with_sim.slot == 1

    def test_same_seed_same_channels(self, scenario, geometry):
        """Should give bit-identical realizations for identical seeds."""
        positions = np.array([[10.0, 5.0], [-20.0, 3.0]])
        model = ChannelModel.from_scenario(scenario, geometry)

        first = model.sample(positions, 0, np.random.default_rng(3))
        second = model.sample(positions, 0, np.random.default_rng(3))

        assert np.array_equal(first.h_sim, second.h_sim)
        assert np.array_equal(first.h_eve, second.h_eve)


class TestOverallChannel:
    """Tests for the end-to-end scalar."""

    def test_matches_explicit_product(self, geometry, rng):
        """Should equal w^H G^H h."""
        g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        w = input_vector(geometry, 0)

        expected = w.conj() @ g.conj().T @ h

        assert overall_channel(w, g, h) == pytest.approx(complex(expected))

    def test_dimension_mismatch(self, geometry):
        """Should reject operands of different sizes."""
        with pytest.raises(DimensionMismatchError):
            overall_channel(np.ones(4), np.eye(4), np.ones(9))
        with pytest.raises(DimensionMismatchError):
            overall_channel(np.ones(4), np.ones((4, 3)), np.ones(4))
