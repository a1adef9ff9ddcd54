"""Unit tests for returns, advantages and the PPO-BOP loss algebra."""

import numpy as np
import pytest

from sim_secrecy.core.exceptions import EmptyTrajectoryError
from sim_secrecy.rl.losses import (
    adapt_alpha,
    clipped_policy_loss,
    clipped_surrogate,
    gae_advantages,
    kl_estimate,
    normalize_advantages,
    opdu_loss,
    pbe_q_backup,
    pbe_return,
    pbe_step_weights,
    value_loss,
)
from sim_secrecy.rl.policy import gaussian_log_density


class TestGae:
    """Tests for generalized advantage estimation."""

    def test_lambda_one_is_discounted_return(self):
        """Should give Monte-Carlo returns minus V when lambda = 1."""
        batch = gae_advantages([1.0, 1.0], [0.0, 0.0], [0.0, 0.0], [False, True], 0.5, 1.0)

        assert batch.advantages.tolist() == pytest.approx([1.5, 1.0])
        assert batch.returns.tolist() == pytest.approx([1.5, 1.0])

    def test_lambda_zero_is_td_error(self):
        """Should give one-step TD errors when lambda = 0."""
        batch = gae_advantages([1.0, 2.0], [0.5, 1.0], [1.0, 3.0], [False, False], 0.9, 0.0)

        assert batch.advantages.tolist() == pytest.approx([1.0 + 0.9 - 0.5, 2.0 + 2.7 - 1.0])
        assert batch.returns.tolist() == pytest.approx([1.4 + 0.5, 3.7 + 1.0])

    def test_does_not_cross_terminals(self):
        """Should restart the accumulation after a terminal step."""
        batch = gae_advantages(
            [1.0, 1.0, 1.0], [0.0] * 3, [5.0, 5.0, 5.0], [False, True, False], 1.0, 1.0
        )

        assert batch.advantages.tolist() == pytest.approx([7.0, 1.0, 6.0])

    def test_empty(self):
        """Should raise EmptyTrajectoryError on an empty segment."""
        with pytest.raises(EmptyTrajectoryError):
            gae_advantages([], [], [], [], 0.9, 0.95)

    def test_normalize(self):
        """Should center and scale to unit deviation; a single entry becomes zero."""
        normalized = normalize_advantages(np.array([1.0, 2.0, 3.0, 6.0]))

        assert normalized.mean() == pytest.approx(0.0, abs=1e-12)
        assert normalized.std() == pytest.approx(1.0, rel=1e-6)
        assert normalize_advantages(np.array([4.0])).tolist() == [0.0]


class TestClippedSurrogate:
    """Tests for the clipped policy objective."""

    def test_ratio_above_range_positive_advantage(self):
        """Should clip the objective at 1 + epsilon with no gradient."""
        result = clipped_surrogate(np.array([1.5]), np.array([1.0]), 0.8, 1.2)

        assert result.loss == pytest.approx(-1.2)
        assert result.grad_log_prob.tolist() == [0.0]
        assert result.clip_fraction == 1.0

    def test_ratio_below_range_positive_advantage(self):
        """Should keep the unclipped term and its gradient -A * ratio."""
        result = clipped_surrogate(np.array([0.5]), np.array([1.0]), 0.8, 1.2)

        assert result.loss == pytest.approx(-0.5)
        assert result.grad_log_prob.tolist() == pytest.approx([-0.5])

    def test_ratio_below_range_negative_advantage(self):
        """Should take the clipped term for a negative advantage."""
        result = clipped_surrogate(np.array([0.5]), np.array([-1.0]), 0.8, 1.2)

        assert result.loss == pytest.approx(0.8)
        assert result.grad_log_prob.tolist() == [0.0]

    def test_batch_mean(self):
        """Should average over the batch."""
        result = clipped_policy_loss(
            np.log([1.0, 1.0]), np.log([1.0, 1.0]), np.array([2.0, -1.0]), 0.2
        )

        assert result.loss == pytest.approx(-0.5)
        assert result.grad_log_prob.tolist() == pytest.approx([-1.0, 0.5])


class TestOpdu:
    """Tests for the off-policy surrogate."""

    def test_reduces_to_clipped_loss_on_policy(self, rng):
        """Should equal the standard clipped loss when the behavior policy is pi_old."""
        old = rng.normal(size=8)
        new = old + rng.normal(scale=0.3, size=8)
        advantages = rng.normal(size=8)

        off = opdu_loss(new, old, old, advantages, 0.3)
        on = clipped_policy_loss(new, old, advantages, 0.3)

        assert off.loss == pytest.approx(on.loss)
        assert np.allclose(off.grad_log_prob, on.grad_log_prob)

    def test_bounds_follow_old_over_behavior(self):
        """Should clip pi / mu to (pi_old / mu)(1 -/+ epsilon), i.e. (1.4, 2.6) for ratio 2."""
        behavior = np.log([1.0, 1.0])
        old = np.log([2.0, 2.0])
        new = np.log([3.0, 1.0])

        high = opdu_loss(new[:1], behavior[:1], old[:1], np.array([1.0]), 0.3)
        low = opdu_loss(new[1:], behavior[1:], old[1:], np.array([-1.0]), 0.3)

        assert high.loss == pytest.approx(-2.6)
        assert low.loss == pytest.approx(1.4)


class TestAlphaAndKl:
    """Tests for the offline share controller and the KL estimate."""

    def test_shrinks_on_large_kl(self):
        """Should scale alpha by threshold / KL when KL exceeds the threshold."""
        assert adapt_alpha(0.5, 1.0, 0.5, 0.05) == pytest.approx(0.25)

    def test_floor(self):
        """Should never go below alpha_min."""
        assert adapt_alpha(0.1, 100.0, 0.5, 0.05) == pytest.approx(0.05)

    def test_grows_on_small_kl(self):
        """Should grow alpha by 5% and cap it at 1."""
        assert adapt_alpha(0.5, 0.1, 0.5, 0.05) == pytest.approx(0.525)
        assert adapt_alpha(0.99, 0.0, 0.5, 0.05) == pytest.approx(1.0)

    def test_estimate_matches_closed_form(self, rng):
        """Should approach the Gaussian KL(mu || pi) for many samples from mu."""
        mean_mu, log_std_mu = np.array([0.0, 0.5]), np.log(np.array([0.5, 1.0]))
        mean_pi, log_std_pi = np.array([0.2, 0.0]), np.log(np.array([0.7, 0.8]))
        actions = mean_mu + np.exp(log_std_mu) * rng.standard_normal((200_000, 2))

        estimate = kl_estimate(
            gaussian_log_density(actions, mean_mu, log_std_mu),
            gaussian_log_density(actions, mean_pi, log_std_pi),
        )
        var_mu, var_pi = np.exp(2 * log_std_mu), np.exp(2 * log_std_pi)
        closed = np.sum(
            log_std_pi - log_std_mu + (var_mu + (mean_mu - mean_pi) ** 2) / (2 * var_pi) - 0.5
        )

        assert estimate == pytest.approx(closed, abs=0.01)

    def test_empty_estimate(self):
        """Should be zero with no samples."""
        assert kl_estimate(np.zeros(0), np.zeros(0)) == 0.0


class TestPolicyBasedEstimation:
    """Tests for the policy-weighted return and the Q backup."""

    def test_weights(self):
        """Should bound pi at 1 before raising it to the weighting exponent."""
        weights = pbe_step_weights(np.log([0.25, 1.0, 4.0]), 0.5)

        assert weights.tolist() == pytest.approx([0.5, 1.0, 1.0])

    def test_per_dimension_weights(self):
        """Should use the geometric mean over action dimensions."""
        weights = pbe_step_weights(np.log([0.0625]), 1.0, action_dim=2, density="per_dimension")

        assert weights.tolist() == pytest.approx([0.25])
        with pytest.raises(ValueError):
            pbe_step_weights(np.zeros(1), 1.0, density="other")

    def test_return_hand_unrolled(self):
        """Should equal the explicit sum of weighted discounted rewards."""
        targets = pbe_return([1.0, 2.0, 3.0], [0.5, 1.0, 0.8], 0.7)

        r2 = 3.0 * 0.8
        r1 = 2.0 * 1.0 + 0.7 * 3.0 * 1.0 * 0.8
        r0 = 1.0 * 0.5 + 0.7 * 2.0 * 0.5 * 1.0 + 0.49 * 3.0 * 0.5 * 1.0 * 0.8
        assert targets.tolist() == pytest.approx([r0, r1, r2])

    def test_return_stops_at_terminal(self):
        """Should not carry rewards across a terminal step."""
        targets = pbe_return([1.0, 2.0, 3.0], [0.5, 1.0, 0.8], 0.7, dones=[False, True, False])

        assert targets.tolist() == pytest.approx([0.5 * (1.0 + 0.7 * 2.0), 2.0, 2.4])

    def test_unit_weights_give_discounted_return(self):
        """Should reduce to the plain discounted return when every weight is one."""
        targets = pbe_return([1.0, 1.0, 1.0], [1.0, 1.0, 1.0], 0.5)

        assert targets.tolist() == pytest.approx([1.75, 1.5, 1.0])

    def test_empty_return(self):
        """Should raise EmptyTrajectoryError on an empty segment."""
        with pytest.raises(EmptyTrajectoryError):
            pbe_return([], [], 0.7)

    def test_q_backup(self):
        """Should give r + discount * mean(Q(s', a')) and r alone at terminals."""
        assert pbe_q_backup(1.0, [2.0, 4.0], 0.5) == pytest.approx(2.5)
        assert pbe_q_backup(1.0, [2.0, 4.0], 0.5, done=True) == pytest.approx(1.0)


class TestValueLoss:
    """Tests for the critic loss."""

    def test_mse_and_gradient(self):
        """Should give the mean squared error and 2 * (v - y) / n."""
        loss, grad = value_loss(np.array([1.0, 3.0]), np.array([0.0, 1.0]))

        assert loss == pytest.approx(2.5)
        assert grad.tolist() == pytest.approx([1.0, 2.0])
