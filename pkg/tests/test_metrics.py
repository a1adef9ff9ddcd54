"""Unit tests for SINR, rate and secrecy-rate computations."""

import math

import numpy as np
import pytest

from sim_secrecy.core.channel import ChannelRealization, overall_channel
from sim_secrecy.core.exceptions import DimensionMismatchError
from sim_secrecy.core.metrics import (
    LinkSnapshot,
    effective_gains,
    rate,
    report_from_snapshot,
    secrecy_rate,
    secrecy_report,
    sinr_bs,
    sinr_eve,
)


def _snapshot(gains, eve_gains, powers, rhi=0.0, noise=1.0):
    return LinkSnapshot(
        gains=np.asarray(gains, dtype=float),
        eve_gains=np.asarray(eve_gains, dtype=float),
        powers=np.asarray(powers, dtype=float),
        rhi=np.full(len(powers), rhi),
        noise_power=noise,
    )


class TestSinr:
    """Tests for SINR with residual hardware impairments."""

    def test_two_users_no_impairments(self):
        """Should give gP / (other user + noise)."""
        snap = _snapshot([1.0, 1.0], [0.25, 0.25], [1.0, 1.0])

        assert sinr_bs(snap, 0) == pytest.approx(0.5)
        assert sinr_eve(snap, 1) == pytest.approx(0.25 / 1.25)

    def test_distortion_includes_own_signal(self):
        """Should add sum_i g_i kappa^2 P_i, including user k, to the denominator."""
        snap = _snapshot([2.0, 1.0], [0.0, 0.0], [1.0, 1.0], rhi=0.1)

        assert sinr_bs(snap, 0) == pytest.approx(2.0 / (1.0 + 3.0 * 0.01 + 1.0))

    def test_single_user_distortion(self):
        """Should give gP / (kappa^2 gP + N0) for one user."""
        snap = _snapshot([4.0], [1.0], [1.0], rhi=0.5, noise=1.0)

        assert sinr_bs(snap, 0) == pytest.approx(4.0 / 2.0)

    def test_zero_power_gives_zero(self):
        """Should report zero SINR for a silent user."""
        snap = _snapshot([1.0, 1.0], [1.0, 1.0], [0.0, 1.0])

        assert sinr_bs(snap, 0) == 0.0

    def test_single_user_increasing_in_power(self):
        """Should strictly increase with power for one user without impairments."""
        values = [sinr_bs(_snapshot([0.3], [0.1], [p]), 0) for p in (0.1, 1.0, 10.0, 100.0)]

        assert all(b > a for a, b in zip(values, values[1:]))

    def test_non_increasing_in_impairment(self):
        """Should never grow as the impairment level grows."""
        values = [
            sinr_bs(_snapshot([2.0, 0.5], [0.1, 0.1], [1.0, 0.7], rhi=kappa), 1)
            for kappa in (0.0, 0.05, 0.1, 0.2, 0.4)
        ]

        assert all(b <= a for a, b in zip(values, values[1:]))

    def test_mismatched_lengths(self):
        """Should raise DimensionMismatchError when arrays disagree."""
        with pytest.raises(DimensionMismatchError):
            _snapshot([1.0], [1.0, 1.0], [1.0, 1.0])


class TestRates:
    """Tests for rates and secrecy rates."""

    def test_rate(self):
        """Should be log2(1 + gamma)."""
        assert rate(1.0) == pytest.approx(1.0)
        assert rate(np.array([0.0, 3.0])) == pytest.approx([0.0, 2.0])

    def test_secrecy_hinge(self):
        """Should clip negative secrecy to zero."""
        assert secrecy_rate(2.0, 0.5) == pytest.approx(1.5)
        assert secrecy_rate(0.5, 2.0) == 0.0

    def test_report(self):
        """Should combine SINRs, rates and secrecy rates per user."""
        report = report_from_snapshot(_snapshot([1.0, 1.0], [0.25, 4.0], [1.0, 1.0]))

        assert report.secrecy[0] == pytest.approx(math.log2(1.5) - math.log2(1.05))
        assert report.secrecy[1] == 0.0
        assert report.sum_secrecy == pytest.approx(report.secrecy.sum())
        assert report.mean_secrecy == pytest.approx(report.secrecy.mean())
        assert report.min_secrecy == 0.0


class TestEffectiveGains:
    """Tests for the end-to-end gains."""

    def test_direct_link(self):
        """Should use |h|^2 when there is no SIM."""
        h = np.array([[3 + 4j], [1j]])

        assert effective_gains(None, None, h) == pytest.approx([25.0, 1.0])

    def test_with_beamformer(self, rng):
        """Should equal |w_k^H G^H h_k|^2 per user."""
        g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        w = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        h = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))

        gains = effective_gains(g, w, h)

        for k in range(2):
            assert gains[k] == pytest.approx(abs(overall_channel(w[k], g, h[k])) ** 2)

    def test_secrecy_report_power_check(self, scenario):
        """Should reject a power vector of the wrong length."""
        channels = ChannelRealization(
            h_sim=np.ones((2, 1), dtype=complex), h_eve=np.ones(2, dtype=complex), slot=0
        )
        with pytest.raises(DimensionMismatchError):
            secrecy_report(None, channels, np.ones(3), scenario)
