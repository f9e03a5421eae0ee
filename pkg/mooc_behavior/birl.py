"""Bayesian inverse reinforcement learning with a Metropolis-Hastings θ-sampler.

The likelihood of a dataset under θ is the Boltzmann policy of Q*_θ evaluated
at every observed (s, a) step; the transition factor does not depend on θ and
is dropped. The prior is uniform on a box, so out-of-box proposals are
rejected without solving the MDP.
"""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import BirlConfig
from .mdp import log_softmax_policy, mdp_vi
from .models import Estimator, Mdp, PosteriorSummary, QFunction, RewardParams, TrajectoryDataset
from .seeding import derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ChainState:
    """Current point of a chain with its cached Q* solve and log-likelihood.

    ``q`` is None while the chain has no data (likelihood ≡ 1, nothing to solve).
    """

    theta: np.ndarray
    q: QFunction | None
    log_lik: float


def _log_likelihood_from_q(q: QFunction, counts: np.ndarray, eta: float) -> float:
    return float(np.sum(counts * log_softmax_policy(q, eta)))


def log_likelihood(mdp: Mdp, theta: RewardParams, data: TrajectoryDataset, eta: float, **vi_kwargs) -> float:
    """Σ over observed steps of η Q*_θ(s,a) − logsumexp_a η Q*_θ(s,·)."""
    data.check_against(mdp)
    counts = data.step_counts(mdp.num_states, mdp.num_actions)
    if not counts.any():
        return 0.0
    return _log_likelihood_from_q(mdp_vi(mdp, theta, **vi_kwargs), counts, eta)


def initial_state(mdp: Mdp, theta: np.ndarray, counts: np.ndarray, cfg: BirlConfig) -> ChainState:
    """Solve the starting point of a chain once."""
    theta = np.asarray(theta, dtype=float)
    if not counts.any():
        return ChainState(theta=theta, q=None, log_lik=0.0)
    q = mdp_vi(mdp, RewardParams(theta), tol=cfg.vi_tol, max_iter=cfg.vi_max_iter)
    return ChainState(theta=theta, q=q, log_lik=_log_likelihood_from_q(q, counts, cfg.eta))


def mh_step(
    mdp: Mdp,
    counts: np.ndarray,
    state: ChainState,
    cfg: BirlConfig,
    rng: np.random.Generator,
) -> tuple[ChainState, bool]:
    """One Metropolis-Hastings step; returns the next state and whether the proposal was accepted."""
    eps = rng.standard_normal(state.theta.shape[0])
    proposal = state.theta + cfg.proposal_sigma * eps
    u = rng.random()

    if not cfg.in_box(proposal):
        return state, False
    if np.array_equal(proposal, state.theta):
        # Zero-width proposal: ratio is exactly 1.
        return state, True
    if state.q is None:
        # No data: pure prior random walk, every in-box proposal is accepted.
        return ChainState(theta=proposal, q=None, log_lik=0.0), True

    q = mdp_vi(
        mdp,
        RewardParams(proposal),
        tol=cfg.vi_tol,
        max_iter=cfg.vi_max_iter,
        q0=state.q.values,
    )
    log_lik = _log_likelihood_from_q(q, counts, cfg.eta)
    log_ratio = log_lik - state.log_lik
    if u < np.exp(min(0.0, log_ratio)):
        return ChainState(theta=proposal, q=q, log_lik=log_lik), True
    return state, False


def sample_theta_step(
    mdp: Mdp,
    theta0: RewardParams,
    data: TrajectoryDataset,
    cfg: BirlConfig,
    rng: np.random.Generator,
) -> RewardParams:
    """Propose θ̃ = θ0 + σε and accept with probability min(1, L(θ̃)P(θ̃) / L(θ0)P(θ0))."""
    if theta0.dim != cfg.dim:
        raise ValueError(f"theta0 has dimension {theta0.dim}, prior box has dimension {cfg.dim}")
    if not cfg.in_box(theta0.theta):
        raise ValueError("theta0 lies outside the prior box")
    data.check_against(mdp)
    counts = data.step_counts(mdp.num_states, mdp.num_actions)
    state = initial_state(mdp, theta0.theta, counts, cfg)
    state, _ = mh_step(mdp, counts, state, cfg, rng)
    return RewardParams(state.theta)


def point_estimate(samples: np.ndarray, estimator: Estimator) -> np.ndarray:
    if estimator == Estimator.mean:
        return samples.mean(axis=0)
    return np.median(samples, axis=0)


def run_birl(mdp: Mdp, data: TrajectoryDataset, cfg: BirlConfig) -> PosteriorSummary:
    """Run one chain from the prior-box center and summarise the retained draws."""
    if cfg.dim != mdp.feature_dim:
        raise ValueError(f"prior box has dimension {cfg.dim}, MDP features have dimension {mdp.feature_dim}")
    data.check_against(mdp)
    counts = data.step_counts(mdp.num_states, mdp.num_actions)
    rng = np.random.default_rng(cfg.seed)

    state = initial_state(mdp, cfg.box_center(), counts, cfg)
    kept = np.empty((cfg.n_samples - cfg.burn_in, cfg.dim))
    trace = np.empty(cfg.n_samples)
    accepted = 0
    for i in range(cfg.n_samples):
        state, ok = mh_step(mdp, counts, state, cfg, rng)
        accepted += ok
        trace[i] = state.log_lik
        if i >= cfg.burn_in:
            kept[i - cfg.burn_in] = state.theta

    return PosteriorSummary(
        point_estimate=RewardParams(point_estimate(kept, cfg.estimator)),
        samples=kept,
        acceptance_rate=accepted / cfg.n_samples,
        log_likelihood_trace=trace,
    )


def run_birl_many(
    mdp: Mdp,
    data: TrajectoryDataset,
    cfg: BirlConfig,
    threads: int = 1,
) -> dict[str, PosteriorSummary]:
    """Independent chains per user, each seeded by (cfg.seed, user_id).

    Results are keyed by user id in dataset order and do not depend on ``threads``.
    """
    users = data.user_ids

    def _one(user_id: str) -> PosteriorSummary:
        user_cfg = dataclasses.replace(cfg, seed=derive_seed(cfg.seed, user_id))
        summary = run_birl(mdp, data.for_user(user_id), user_cfg)
        logger.info("BIRL chain for %s done (acceptance %.2f)", user_id, summary.acceptance_rate)
        return summary

    if threads <= 1:
        results = [_one(u) for u in users]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_one, users))
    return dict(zip(users, results))
