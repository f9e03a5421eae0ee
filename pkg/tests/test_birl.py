"""Tests for the BIRL likelihood and Metropolis-Hastings θ-sampler."""

import numpy as np
import pytest
from scipy.special import logsumexp

from mooc_behavior.birl import log_likelihood, run_birl, run_birl_many, sample_theta_step
from mooc_behavior.config import BirlConfig
from mooc_behavior.mdp import greedy_policy, log_softmax_policy, mdp_vi, reward_of
from mooc_behavior.models import Mdp, QFunction, RewardParams, Trajectory, TrajectoryDataset


def _cfg(dim: int, **kwargs) -> BirlConfig:
    return BirlConfig(prior_lo=-np.ones(dim), prior_hi=np.ones(dim), **kwargs)


def _dataset(*steps: tuple[int, int], user: str = "u1") -> TrajectoryDataset:
    states, actions = zip(*steps)
    return TrajectoryDataset((Trajectory(user, states, actions),))


class TestLogLikelihood:
    def test_empty_dataset(self, two_state_mdp):
        assert log_likelihood(two_state_mdp, RewardParams([0.3]), TrajectoryDataset(), eta=5.0) == 0.0

    def test_single_action_mdp(self):
        mdp = Mdp(np.full((2, 1, 2), 0.5), np.ones((2, 1, 1)), 0.9, np.array([0.5, 0.5]))
        data = _dataset((0, 0), (1, 0), (0, 0))
        assert log_likelihood(mdp, RewardParams([0.8]), data, eta=3.0) == pytest.approx(0.0, abs=1e-12)

    def test_hand_expanded_three_steps(self, two_state_mdp):
        theta = RewardParams([0.4])
        eta = 2.0
        q = mdp_vi(two_state_mdp, theta).values
        steps = [(0, 1), (1, 0), (0, 0)]
        expected = sum(eta * q[s, a] - logsumexp(eta * q[s]) for s, a in steps)
        assert log_likelihood(two_state_mdp, theta, _dataset(*steps), eta) == pytest.approx(expected, abs=1e-12)

    def test_invariant_to_per_state_shift(self):
        q = np.random.default_rng(0).normal(size=(3, 4))
        shift = np.array([[1.0], [-7.0], [3.5]])
        a = log_softmax_policy(QFunction(q), 2.0)
        b = log_softmax_policy(QFunction(q + shift), 2.0)
        assert np.allclose(a, b, atol=1e-12)

    def test_out_of_range_indices(self, two_state_mdp):
        with pytest.raises(ValueError, match="outside the MDP"):
            log_likelihood(two_state_mdp, RewardParams([0.0]), _dataset((2, 0)), eta=1.0)


class TestSampleThetaStep:
    def test_zero_sigma_is_identity(self, two_state_mdp):
        theta0 = RewardParams([0.25])
        out = sample_theta_step(
            two_state_mdp, theta0, _dataset((0, 1)), _cfg(1, proposal_sigma=0.0), np.random.default_rng(1)
        )
        assert np.array_equal(out.theta, theta0.theta)

    def test_out_of_box_proposal_keeps_theta(self, two_state_mdp):
        cfg = BirlConfig(prior_lo=[0.0], prior_hi=[1e-6], proposal_sigma=10.0)
        theta0 = RewardParams([5e-7])
        for seed in range(5):
            out = sample_theta_step(two_state_mdp, theta0, _dataset((0, 1)), cfg, np.random.default_rng(seed))
            assert np.array_equal(out.theta, theta0.theta)

    def test_stays_in_box(self, two_state_mdp):
        cfg = _cfg(1, proposal_sigma=0.8)
        rng = np.random.default_rng(2)
        theta = RewardParams([0.9])
        data = _dataset((0, 1), (1, 1), (0, 0))
        for _ in range(50):
            theta = sample_theta_step(two_state_mdp, theta, data, cfg, rng)
            assert cfg.in_box(theta.theta)

    def test_rejects_start_outside_box(self, two_state_mdp):
        with pytest.raises(ValueError, match="outside the prior box"):
            sample_theta_step(two_state_mdp, RewardParams([2.0]), _dataset((0, 1)), _cfg(1), np.random.default_rng(0))


class TestRunBirl:
    def test_single_retained_sample(self, two_state_mdp):
        summary = run_birl(two_state_mdp, _dataset((0, 1), (1, 1)), _cfg(1, n_samples=6, burn_in=5))
        assert summary.samples.shape == (1, 1)
        assert np.array_equal(summary.point_estimate.theta, summary.samples[0])
        assert summary.log_likelihood_trace.shape == (6,)

    def test_zero_sigma_accepts_everything(self, two_state_mdp):
        summary = run_birl(two_state_mdp, _dataset((0, 1)), _cfg(1, proposal_sigma=0.0, n_samples=20, burn_in=5))
        assert summary.acceptance_rate == 1.0
        assert np.all(summary.samples == 0.0)

    def test_reproducible_and_in_box(self, make_mdp):
        mdp = make_mdp(np.random.default_rng(3), 3, 2, 2)
        data = _dataset((0, 1), (1, 0), (2, 1), (1, 1))
        cfg = _cfg(2, proposal_sigma=0.5, n_samples=300, burn_in=50, seed=11)
        a = run_birl(mdp, data, cfg)
        b = run_birl(mdp, data, cfg)
        assert np.array_equal(a.samples, b.samples)
        assert np.all(np.abs(a.samples) <= 1.0)
        assert 0.0 < a.acceptance_rate <= 1.0

    def test_no_data_walks_the_prior(self, two_state_mdp):
        summary = run_birl(two_state_mdp, TrajectoryDataset(), _cfg(1, proposal_sigma=0.3, n_samples=200, burn_in=0))
        assert np.all(summary.log_likelihood_trace == 0.0)
        assert np.unique(summary.samples).size > 1

    def test_dimension_mismatch(self, two_state_mdp):
        with pytest.raises(ValueError, match="dimension"):
            run_birl(two_state_mdp, _dataset((0, 1)), _cfg(3))

    def test_many_users_independent_of_threads(self, make_mdp):
        mdp = make_mdp(np.random.default_rng(4), 3, 2, 2)
        data = TrajectoryDataset(
            (
                Trajectory("a", [0, 1, 2], [1, 1, 0]),
                Trajectory("b", [2, 2, 0], [0, 0, 1]),
                Trajectory("c", [1, 0, 1], [1, 0, 0]),
            )
        )
        cfg = _cfg(2, proposal_sigma=0.4, n_samples=80, burn_in=20, seed=5)
        serial = run_birl_many(mdp, data, cfg, threads=1)
        parallel = run_birl_many(mdp, data, cfg, threads=3)
        assert list(serial) == ["a", "b", "c"]
        for user in serial:
            assert np.array_equal(serial[user].samples, parallel[user].samples)
        assert not np.array_equal(serial["a"].samples, serial["b"].samples)


def _grid_posterior(mdp: Mdp, data: TrajectoryDataset, eta: float, edges: np.ndarray) -> np.ndarray:
    grid = np.linspace(-2.0, 2.0, 1000, endpoint=False) + 0.002
    log_post = np.array([log_likelihood(mdp, RewardParams([g]), data, eta) for g in grid])
    weights = np.exp(log_post - log_post.max())
    mass, _ = np.histogram(grid, bins=edges, weights=weights)
    return mass / mass.sum()


@pytest.mark.slow
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_chain_matches_grid_quadrature(two_state_mdp, seed):
    data = _dataset((0, 1), (0, 1), (0, 1), (0, 0), (0, 0), (1, 1), (1, 0), (1, 0))
    eta = 1.0
    edges = np.linspace(-2.0, 2.0, 11)
    expected = _grid_posterior(two_state_mdp, data, eta, edges)

    cfg = BirlConfig(
        prior_lo=[-2.0], prior_hi=[2.0], eta=eta, proposal_sigma=1.0, n_samples=51_000, burn_in=1_000, seed=seed
    )
    draws = run_birl(two_state_mdp, data, cfg).samples[:, 0]
    observed, _ = np.histogram(draws, bins=edges)
    observed = observed / observed.sum()
    assert 0.5 * np.abs(observed - expected).sum() < 0.05


def _indicator_mdp(n_s: int = 5, n_a: int = 3) -> Mdp:
    rng = np.random.default_rng(7)
    row = rng.dirichlet(np.ones(n_s), size=n_s)
    transitions = np.repeat(row[:, None, :], n_a, axis=1)
    phi = np.eye(n_s * n_a).reshape(n_s, n_a, n_s * n_a)
    return Mdp(transitions, phi, 0.9, np.full(n_s, 1 / n_s))


def _rollout(mdp: Mdp, theta: np.ndarray, eta: float, steps: int, user: str, rng: np.random.Generator) -> Trajectory:
    probs = np.exp(log_softmax_policy(mdp_vi(mdp, RewardParams(theta)), eta))
    states, actions = [], []
    s = rng.choice(mdp.num_states, p=mdp.initial_dist)
    for _ in range(steps):
        a = rng.choice(mdp.num_actions, p=probs[s])
        states.append(s)
        actions.append(a)
        s = rng.choice(mdp.num_states, p=mdp.transitions[s, a])
    return Trajectory(user, states, actions)


@pytest.mark.slow
def test_recovers_planted_greedy_policies():
    mdp = _indicator_mdp()
    rng = np.random.default_rng(8)
    planted: dict[str, np.ndarray] = {}
    trajectories = []
    for i in range(20):
        user = f"u{i:02d}"
        theta = -np.ones((5, 3))
        theta[np.arange(5), rng.integers(0, 3, size=5)] = 1.0
        planted[user] = theta.ravel()
        trajectories.append(_rollout(mdp, planted[user], 5.0, 200, user, rng))
    data = TrajectoryDataset(tuple(trajectories))
    cfg = BirlConfig(prior_lo=-np.ones(15), prior_hi=np.ones(15), n_samples=3000, burn_in=1000, seed=3)

    results = run_birl_many(mdp, data, cfg, threads=4)
    good = 0
    for user, summary in results.items():
        true_greedy = greedy_policy(mdp_vi(mdp, RewardParams(planted[user])))
        est_greedy = greedy_policy(mdp_vi(mdp, summary.point_estimate))
        good += np.mean(true_greedy == est_greedy) >= 0.9
    assert good >= 18


@pytest.mark.slow
def test_uninformative_data_leaves_greedy_policy_open():
    mdp = _indicator_mdp()
    data = TrajectoryDataset((_rollout(mdp, np.zeros(15), 0.0, 200, "u", np.random.default_rng(9)),))
    cfg = BirlConfig(
        prior_lo=-np.ones(15), prior_hi=np.ones(15), eta=0.0, n_samples=3000, burn_in=1000, seed=4
    )
    summary = run_birl(mdp, data, cfg)
    greedy = [tuple(np.argmax(reward_of(mdp, RewardParams(t)), axis=1)) for t in summary.samples]
    _, counts = np.unique(np.array(greedy), axis=0, return_counts=True)
    assert counts.max() / len(greedy) <= 0.6
