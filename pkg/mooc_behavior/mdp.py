"""Value iteration, policy evaluation and Boltzmann policies for reward-parametrized MDPs."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import log_softmax, softmax

from .errors import ConvergenceError
from .models import Mdp, QFunction, RewardParams, StochasticPolicy

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 10_000


@dataclass(frozen=True, eq=False)
class PolicyValue:
    """V^π per state and its expectation under the initial distribution."""

    values: np.ndarray
    expected: float


def reward_of(mdp: Mdp, theta: RewardParams) -> np.ndarray:
    """R_θ(s,a) = θ·φ(s,a) as an N_s × N_a table."""
    if theta.dim != mdp.feature_dim:
        raise ValueError(f"theta has dimension {theta.dim}, MDP features have dimension {mdp.feature_dim}")
    return mdp.features @ theta.theta


def _stopping_residual(discount: float, tol: float) -> float:
    # ‖TQ − Q‖ ≤ tol·(1−ν)/ν puts TQ within tol of Q* in sup norm.
    return tol * (1.0 - discount) / discount


def bellman_backup(mdp: Mdp, reward: np.ndarray, q: np.ndarray) -> np.ndarray:
    """One application of the Bellman optimality operator."""
    return reward + mdp.discount * (mdp.transitions @ q.max(axis=1))


def mdp_vi(
    mdp: Mdp,
    theta: RewardParams,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    q0: np.ndarray | None = None,
) -> QFunction:
    """Solve Q*_θ by value iteration.

    Iterates Q ← R_θ + ν P max_a Q until the Bellman residual drops below
    tol·(1−ν)/ν, which bounds the sup-norm distance to Q* by ``tol``.
    ``q0`` warm-starts the iteration; the result is deterministic given inputs.
    Raises ConvergenceError carrying the last residual after ``max_iter`` sweeps.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    reward = reward_of(mdp, theta)
    target = _stopping_residual(mdp.discount, tol)
    q = np.zeros_like(reward) if q0 is None else np.array(q0, dtype=float)
    if q.shape != reward.shape:
        raise ValueError(f"warm start has shape {q.shape}, expected {reward.shape}")

    residual = np.inf
    for iteration in range(1, max_iter + 1):
        q_next = bellman_backup(mdp, reward, q)
        residual = float(np.max(np.abs(q_next - q)))
        q = q_next
        if residual <= target:
            logger.debug("Value iteration converged in %d sweeps (residual %.3e)", iteration, residual)
            return QFunction(q)
    raise ConvergenceError("value iteration", residual, max_iter)


def greedy_policy(q: QFunction) -> np.ndarray:
    """Argmax action per state; ties go to the lowest action index."""
    return np.argmax(q.values, axis=1)


def softmax_policy(q: QFunction, eta: float) -> StochasticPolicy:
    """Boltzmann policy π(s,a) ∝ exp(η Q(s,a)), stabilised by per-row max subtraction."""
    if eta < 0:
        raise ValueError("eta must be >= 0")
    return StochasticPolicy(softmax(eta * q.values, axis=1))


def log_softmax_policy(q: QFunction, eta: float) -> np.ndarray:
    """log π(s,a) = η Q(s,a) − logsumexp_a η Q(s,·)."""
    if eta < 0:
        raise ValueError("eta must be >= 0")
    return log_softmax(eta * q.values, axis=1)


def policy_value(
    mdp: Mdp,
    theta: RewardParams,
    policy: StochasticPolicy,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> PolicyValue:
    """Evaluate V^π by iterating the policy Bellman operator to sup-norm tolerance ``tol``."""
    if policy.probs.shape != (mdp.num_states, mdp.num_actions):
        raise ValueError(f"policy shape {policy.probs.shape} does not match the MDP")
    reward = reward_of(mdp, theta)
    r_pi = np.sum(policy.probs * reward, axis=1)
    p_pi = np.einsum("sa,sat->st", policy.probs, mdp.transitions)
    target = _stopping_residual(mdp.discount, tol)

    v = np.zeros(mdp.num_states)
    residual = np.inf
    for _ in range(max_iter):
        v_next = r_pi + mdp.discount * (p_pi @ v)
        residual = float(np.max(np.abs(v_next - v)))
        v = v_next
        if residual <= target:
            return PolicyValue(values=v, expected=float(mdp.initial_dist @ v))
    raise ConvergenceError("policy evaluation", residual, max_iter)
