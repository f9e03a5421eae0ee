"""Tests for value iteration, policy evaluation and Boltzmann policies."""

import numpy as np
import pytest

from mooc_behavior.errors import ConvergenceError
from mooc_behavior.mdp import (
    bellman_backup,
    greedy_policy,
    log_softmax_policy,
    mdp_vi,
    policy_value,
    reward_of,
    softmax_policy,
)
from mooc_behavior.models import Mdp, QFunction, RewardParams, StochasticPolicy


class TestRewardOf:
    def test_zero_theta(self, make_mdp):
        mdp = make_mdp(np.random.default_rng(0), 3, 2, 4)
        assert np.array_equal(reward_of(mdp, RewardParams(np.zeros(4))), np.zeros((3, 2)))

    def test_indicator_basis(self):
        n_s, n_a = 3, 2
        phi = np.eye(n_s * n_a).reshape(n_s, n_a, n_s * n_a)
        mdp = Mdp(np.full((n_s, n_a, n_s), 1 / n_s), phi, 0.9, np.full(n_s, 1 / n_s))
        theta = np.zeros(n_s * n_a)
        theta[3] = 1.0
        expected = np.zeros((n_s, n_a))
        expected[1, 1] = 1.0
        assert np.array_equal(reward_of(mdp, RewardParams(theta)), expected)

    def test_dot_products(self, make_mdp):
        rng = np.random.default_rng(1)
        mdp = make_mdp(rng, 2, 2, 3)
        theta = rng.normal(size=3)
        r = reward_of(mdp, RewardParams(theta))
        for s in range(2):
            for a in range(2):
                assert r[s, a] == pytest.approx(sum(theta[k] * mdp.features[s, a, k] for k in range(3)), abs=1e-14)

    def test_dimension_mismatch(self, chain_mdp):
        with pytest.raises(ValueError, match="dimension"):
            reward_of(chain_mdp, RewardParams([1.0, 2.0]))


class TestValueIteration:
    def test_zero_reward(self, make_mdp):
        mdp = make_mdp(np.random.default_rng(2), 4, 3, 2)
        q = mdp_vi(mdp, RewardParams(np.zeros(2)))
        assert np.array_equal(q.values, np.zeros((4, 3)))

    def test_geometric_sum(self, chain_mdp):
        q = mdp_vi(chain_mdp, RewardParams([1.0]))
        assert q.values[0, 0] == pytest.approx(10.0, abs=1e-9)

    def test_matches_policy_enumeration(self, make_mdp, policy_values):
        rng = np.random.default_rng(3)
        for _ in range(200):
            n_s, n_a, n_feat = rng.integers(1, 5), rng.integers(1, 4), rng.integers(1, 4)
            mdp = make_mdp(rng, int(n_s), int(n_a), int(n_feat))
            theta = RewardParams(rng.uniform(-1, 1, size=int(n_feat)))
            q = mdp_vi(mdp, theta)
            policies, values = policy_values(mdp, reward_of(mdp, theta))
            best = values.max(axis=0)
            assert np.allclose(q.state_values(), best, atol=1e-6)
            greedy = tuple(greedy_policy(q).tolist())
            assert np.allclose(values[policies.index(greedy)], best, atol=1e-6)

    def test_bellman_residual_within_bound(self, make_mdp):
        rng = np.random.default_rng(4)
        tol = 1e-7
        for _ in range(20):
            mdp = make_mdp(rng, 4, 3, 2)
            theta = RewardParams(rng.uniform(-1, 1, size=2))
            q = mdp_vi(mdp, theta, tol=tol)
            residual = np.max(np.abs(bellman_backup(mdp, reward_of(mdp, theta), q.values) - q.values))
            assert residual <= tol * (1 - mdp.discount) / mdp.discount

    def test_constant_reward_shift(self, make_mdp):
        rng = np.random.default_rng(5)
        mdp = make_mdp(rng, 3, 2, 2)
        theta = rng.uniform(-1, 1, size=2)
        shifted = Mdp(
            mdp.transitions,
            np.concatenate([mdp.features, np.ones((3, 2, 1))], axis=2),
            mdp.discount,
            mdp.initial_dist,
        )
        c = 0.7
        q = mdp_vi(mdp, RewardParams(theta))
        q_shifted = mdp_vi(shifted, RewardParams(np.append(theta, c)))
        assert np.allclose(q_shifted.values - q.values, c / (1 - mdp.discount), atol=1e-8)

    def test_warm_start_gives_same_fixed_point(self, make_mdp):
        rng = np.random.default_rng(6)
        mdp = make_mdp(rng, 4, 2, 3)
        theta = RewardParams(rng.uniform(-1, 1, size=3))
        cold = mdp_vi(mdp, theta)
        warm = mdp_vi(mdp, theta, q0=cold.values + 0.5)
        assert np.allclose(cold.values, warm.values, atol=2e-9)

    def test_iteration_cap(self, chain_mdp):
        with pytest.raises(ConvergenceError) as exc:
            mdp_vi(chain_mdp, RewardParams([1.0]), max_iter=1)
        assert exc.value.iterations == 1
        assert exc.value.residual == pytest.approx(1.0)

    def test_bounded_by_reward_scale(self, make_mdp):
        rng = np.random.default_rng(7)
        mdp = make_mdp(rng, 4, 3, 2)
        theta = RewardParams(rng.uniform(-1, 1, size=2))
        bound = np.abs(reward_of(mdp, theta)).max() / (1 - mdp.discount)
        assert np.abs(mdp_vi(mdp, theta).values).max() <= bound + 1e-9


class TestSoftmaxPolicy:
    def test_zero_eta_is_uniform(self):
        q = QFunction(np.random.default_rng(8).normal(size=(3, 4)))
        assert np.allclose(softmax_policy(q, 0.0).probs, 0.25, atol=1e-15)

    def test_constant_row_is_uniform(self):
        q = QFunction(np.array([[2.0, 2.0, 2.0]]))
        assert np.allclose(softmax_policy(q, 50.0).probs, 1 / 3, atol=1e-15)

    def test_large_eta_limit(self):
        q = QFunction(np.array([[0.0, 0.01], [1.3, 1.29]]))
        probs = softmax_policy(q, 1e6).probs
        greedy = StochasticPolicy.deterministic(greedy_policy(q), 2).probs
        tv = 0.5 * np.abs(probs - greedy).sum(axis=1)
        assert np.all(tv < 1e-6)

    def test_rows_sum_to_one_and_argmax_agrees(self):
        q = QFunction(np.random.default_rng(9).normal(size=(6, 3)) * 5)
        probs = softmax_policy(q, 2.0).probs
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-12)
        assert np.array_equal(np.argmax(probs, axis=1), greedy_policy(q))

    def test_scaling_invariance(self):
        values = np.random.default_rng(10).normal(size=(4, 3))
        k = 3.5
        a = softmax_policy(QFunction(values), 2.0).probs
        b = softmax_policy(QFunction(values * k), 2.0 / k).probs
        assert np.allclose(a, b, atol=1e-12)

    def test_log_softmax_matches(self):
        q = QFunction(np.random.default_rng(11).normal(size=(3, 3)))
        assert np.allclose(np.exp(log_softmax_policy(q, 1.7)), softmax_policy(q, 1.7).probs, atol=1e-14)

    def test_negative_eta_rejected(self):
        with pytest.raises(ValueError):
            softmax_policy(QFunction(np.zeros((1, 2))), -1.0)

    def test_greedy_ties_go_to_lowest_index(self):
        assert greedy_policy(QFunction(np.array([[1.0, 1.0, 0.0]]))).tolist() == [0]


class TestPolicyValue:
    def test_zero_reward(self, make_mdp):
        mdp = make_mdp(np.random.default_rng(12), 3, 2, 2)
        pv = policy_value(mdp, RewardParams(np.zeros(2)), StochasticPolicy(np.full((3, 2), 0.5)))
        assert np.array_equal(pv.values, np.zeros(3))
        assert pv.expected == 0.0

    def test_geometric_sum(self, chain_mdp):
        pv = policy_value(chain_mdp, RewardParams([1.0]), StochasticPolicy(np.ones((1, 1))))
        assert pv.values[0] == pytest.approx(10.0, abs=1e-9)

    def test_greedy_policy_value_matches_q(self, make_mdp):
        rng = np.random.default_rng(13)
        tol = 1e-8
        for _ in range(10):
            mdp = make_mdp(rng, 4, 3, 2)
            theta = RewardParams(rng.uniform(-1, 1, size=2))
            q = mdp_vi(mdp, theta, tol=tol)
            greedy = StochasticPolicy.deterministic(greedy_policy(q), 3)
            pv = policy_value(mdp, theta, greedy, tol=tol)
            assert np.allclose(pv.values, q.state_values(), atol=2 * tol)

    def test_greedy_dominates_enumerated_policies(self, make_mdp, policy_values):
        rng = np.random.default_rng(14)
        mdp = make_mdp(rng, 3, 3, 2)
        theta = RewardParams(rng.uniform(-1, 1, size=2))
        q = mdp_vi(mdp, theta)
        greedy = policy_value(mdp, theta, StochasticPolicy.deterministic(greedy_policy(q), 3))
        _, values = policy_values(mdp, reward_of(mdp, theta))
        assert np.all(greedy.values[None, :] >= values - 1e-7)

    def test_shape_mismatch(self, chain_mdp):
        with pytest.raises(ValueError, match="policy shape"):
            policy_value(chain_mdp, RewardParams([1.0]), StochasticPolicy(np.full((1, 2), 0.5)))


class TestModelValidation:
    def test_transitions_must_be_stochastic(self):
        with pytest.raises(ValueError, match="sum to 1"):
            Mdp(np.full((2, 1, 2), 0.4), np.zeros((2, 1, 1)), 0.9, np.array([0.5, 0.5]))

    def test_discount_range(self):
        with pytest.raises(ValueError, match="discount"):
            Mdp(np.ones((1, 1, 1)), np.zeros((1, 1, 1)), 1.0, np.ones(1))

    def test_tables_are_read_only(self, chain_mdp):
        with pytest.raises(ValueError):
            chain_mdp.transitions[0, 0, 0] = 0.5
