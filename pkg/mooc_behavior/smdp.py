"""Switched-MDP inference: HMM lattice over behavior modes and the DBC Gibbs sampler.

Each mode k selects a reward vector θ_k; the observation at step t is the
(state, action) pair, emitted by the Boltzmann policy of θ_{z_t}. The state
transition factor is shared by every mode and cancels in all mode posteriors,
so emissions are log π_k(s_t, a_t) only.
"""

from __future__ import annotations

import contextlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .birl import initial_state, mh_step
from .config import DbcConfig
from .mdp import log_softmax_policy, mdp_vi
from .models import Mdp, ModeSequence, ModeStats, RewardParams, SmdpModel, Trajectory, TrajectoryDataset

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DbcState:
    """Parameters carried from one sweep to the next, plus the sweep's decoded modes."""

    thetas: np.ndarray
    zeta: np.ndarray
    log_policies: np.ndarray
    sequences: tuple[ModeSequence, ...] = ()
    stats: ModeStats | None = None

    @property
    def policies(self) -> np.ndarray:
        return np.exp(self.log_policies)


@dataclass(frozen=True, eq=False)
class DbcResult:
    """Posterior summary of a DBC run, modes sorted by descending occupancy."""

    model: SmdpModel
    sequences: tuple[ModeSequence, ...]
    policies: np.ndarray
    theta_samples: np.ndarray
    zeta_samples: np.ndarray


def uniform_modes(num_modes: int) -> np.ndarray:
    return np.full(num_modes, 1.0 / num_modes)


def sticky_prior_mean(num_modes: int, alpha: float) -> np.ndarray:
    """Mean of Dir(α·1 + δ_i) for every row i: (α + 1{i=j}) / (Lα + 1)."""
    return (alpha + np.eye(num_modes)) / (num_modes * alpha + 1.0)


def mode_log_policies(mdp: Mdp, thetas: np.ndarray, eta: float, tol: float = 1e-9, max_iter: int = 10_000) -> np.ndarray:
    """(L, N_s, N_a) table of log π̃^η_{θ_k}; one value-iteration solve per mode."""
    return np.stack(
        [log_softmax_policy(mdp_vi(mdp, RewardParams(theta), tol=tol, max_iter=max_iter), eta) for theta in thetas]
    )


def _emissions(log_policies: np.ndarray, traj: Trajectory) -> np.ndarray:
    return log_policies[:, traj.states, traj.actions].T


def emission_logprobs(mdp: Mdp, model: SmdpModel, traj: Trajectory, **vi_kwargs) -> np.ndarray:
    """T × L table of log π̃^η_{θ_k}(s_t, a_t)."""
    if model.thetas.shape[1] != mdp.feature_dim:
        raise ValueError(f"mode thetas have dimension {model.thetas.shape[1]}, MDP features {mdp.feature_dim}")
    traj.check_against(mdp)
    return _emissions(mode_log_policies(mdp, model.thetas, model.eta, **vi_kwargs), traj)


def viterbi(emissions: np.ndarray, model: SmdpModel, user_id: str = "") -> tuple[ModeSequence, ModeStats]:
    """MAP mode path (max-sum) and expected transition counts F (sum-product).

    The path breaks ties toward the lower mode index. F_ij = Σ_t P(z_t=i, z_{t+1}=j | y);
    the per-step posterior maxima ride along on the returned ModeSequence.
    """
    emissions = np.atleast_2d(np.asarray(emissions, dtype=float))
    n_steps, num_modes = emissions.shape
    if num_modes != model.num_modes:
        raise ValueError(f"emissions have {num_modes} columns, model has {model.num_modes} modes")
    with np.errstate(divide="ignore"):
        log_zeta = np.log(model.zeta)
        log_init = np.log(model.initial_modes)

    # max-sum
    score = log_init + emissions[0]
    back = np.zeros((n_steps, num_modes), dtype=np.int64)
    cols = np.arange(num_modes)
    for t in range(1, n_steps):
        cand = score[:, None] + log_zeta
        back[t] = np.argmax(cand, axis=0)
        score = cand[back[t], cols] + emissions[t]
    path = np.empty(n_steps, dtype=np.int64)
    path[-1] = int(np.argmax(score))
    for t in range(n_steps - 1, 0, -1):
        path[t - 1] = back[t, path[t]]

    # sum-product
    with np.errstate(divide="ignore", invalid="ignore"):
        log_alpha = np.empty((n_steps, num_modes))
        log_beta = np.zeros((n_steps, num_modes))
        log_alpha[0] = log_init + emissions[0]
        for t in range(1, n_steps):
            log_alpha[t] = emissions[t] + logsumexp(log_alpha[t - 1][:, None] + log_zeta, axis=0)
        for t in range(n_steps - 2, -1, -1):
            log_beta[t] = logsumexp(log_zeta + (emissions[t + 1] + log_beta[t + 1])[None, :], axis=1)
        log_z = logsumexp(log_alpha[-1])
        posteriors = np.exp(log_alpha + log_beta - log_z)
        if n_steps > 1:
            log_xi = (
                log_alpha[:-1, :, None]
                + log_zeta[None, :, :]
                + (emissions[1:] + log_beta[1:])[:, None, :]
                - log_z
            )
            counts = np.exp(log_xi).sum(axis=0)
        else:
            counts = np.zeros((num_modes, num_modes))

    sequence = ModeSequence(user_id=user_id, modes=path, posterior_max=posteriors.max(axis=1))
    return sequence, ModeStats(counts)


def sample_hmm_param(stats: ModeStats, cfg: DbcConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw ζ row-wise from the sticky conjugate posterior Dir(α·1 + δ_i + F_i)."""
    num_modes = stats.counts.shape[0]
    if num_modes != cfg.num_modes:
        raise ValueError(f"statistics cover {num_modes} modes, config expects {cfg.num_modes}")
    concentration = cfg.alpha + np.eye(num_modes) + stats.counts
    return np.stack([rng.dirichlet(row) for row in concentration])


def partition_counts(data: TrajectoryDataset, sequences: tuple[ModeSequence, ...], num_modes: int, mdp: Mdp) -> np.ndarray:
    """(L, N_s, N_a) visit counts of each mode's share D^k of the data."""
    counts = np.zeros((num_modes, mdp.num_states, mdp.num_actions))
    for traj, seq in zip(data.trajectories, sequences):
        np.add.at(counts, (seq.modes, traj.states, traj.actions), 1.0)
    return counts


def sample_mdp_param(
    mdp: Mdp,
    mode_counts: np.ndarray,
    thetas_prev: np.ndarray,
    cfg: DbcConfig,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Advance each mode's θ-chain by ``cfg.inner_mh_steps`` MH steps on its own data.

    Returns the new thetas (L × N) and their log-policies (L × N_s × N_a). A mode
    with no data walks under the prior alone.
    """
    theta_cfg = cfg.theta_config(seed=cfg.seed)
    thetas = np.empty_like(np.asarray(thetas_prev, dtype=float))
    log_policies = np.empty((cfg.num_modes, mdp.num_states, mdp.num_actions))
    for k in range(cfg.num_modes):
        counts = mode_counts[k]
        if not counts.any():
            logger.debug("Mode %d has no observations this sweep", k)
        state = initial_state(mdp, thetas_prev[k], counts, theta_cfg)
        for _ in range(cfg.inner_mh_steps):
            state, _ = mh_step(mdp, counts, state, theta_cfg, rng)
        q = state.q
        if q is None:
            q = mdp_vi(mdp, RewardParams(state.theta), tol=cfg.vi_tol, max_iter=cfg.vi_max_iter)
        thetas[k] = state.theta
        log_policies[k] = log_softmax_policy(q, cfg.eta)
    return thetas, log_policies


def _decode_all(
    data: TrajectoryDataset,
    log_policies: np.ndarray,
    model: SmdpModel,
    pool: ThreadPoolExecutor | None,
) -> list[tuple[ModeSequence, ModeStats]]:
    def _one(traj: Trajectory) -> tuple[ModeSequence, ModeStats]:
        return viterbi(_emissions(log_policies, traj), model, traj.user_id)

    if pool is None:
        return [_one(t) for t in data.trajectories]
    return list(pool.map(_one, data.trajectories))


def dbc_sweep(
    mdp: Mdp,
    data: TrajectoryDataset,
    state: DbcState,
    cfg: DbcConfig,
    rng: np.random.Generator,
    pool: ThreadPoolExecutor | None = None,
) -> DbcState:
    """One Gibbs sweep: decode every user under the previous parameters, then resample ζ and Θ."""
    model = SmdpModel(state.thetas, state.zeta, uniform_modes(cfg.num_modes), cfg.eta)
    decoded = _decode_all(data, state.log_policies, model, pool)

    total = np.zeros((cfg.num_modes, cfg.num_modes))
    for _, stats in decoded:  # fixed user order
        total += stats.counts
    sequences = tuple(seq for seq, _ in decoded)
    stats = ModeStats(total)

    zeta = sample_hmm_param(stats, cfg, rng)
    mode_counts = partition_counts(data, sequences, cfg.num_modes, mdp)
    thetas, log_policies = sample_mdp_param(mdp, mode_counts, state.thetas, cfg, rng)
    return DbcState(thetas=thetas, zeta=zeta, log_policies=log_policies, sequences=sequences, stats=stats)


def initial_dbc_state(mdp: Mdp, cfg: DbcConfig, rng: np.random.Generator) -> DbcState:
    """θ_k drawn uniformly from the prior box, ζ at the sticky prior mean."""
    thetas = rng.uniform(cfg.prior_lo, cfg.prior_hi, size=(cfg.num_modes, cfg.prior_lo.shape[0]))
    zeta = sticky_prior_mean(cfg.num_modes, cfg.alpha)
    log_policies = mode_log_policies(mdp, thetas, cfg.eta, cfg.vi_tol, cfg.vi_max_iter)
    return DbcState(thetas=thetas, zeta=zeta, log_policies=log_policies)


def canonical_order(sequences: tuple[ModeSequence, ...], num_modes: int) -> np.ndarray:
    """Mode order by descending total occupancy (stable on ties)."""
    occupancy = np.zeros(num_modes)
    for seq in sequences:
        occupancy += np.bincount(seq.modes, minlength=num_modes)
    return np.argsort(-occupancy, kind="stable")


def _relabel(seq: ModeSequence, order: np.ndarray) -> ModeSequence:
    inverse = np.empty_like(order)
    inverse[order] = np.arange(order.shape[0])
    return ModeSequence(user_id=seq.user_id, modes=inverse[seq.modes], posterior_max=seq.posterior_max)


def run_dbc(mdp: Mdp, data: TrajectoryDataset, cfg: DbcConfig, threads: int = 1) -> DbcResult:
    """Iterate ``dbc_sweep`` and summarise the retained sweeps.

    Reports componentwise median θ per mode and mean ζ, then decodes every
    trajectory once more under that summary model. Deterministic given cfg.seed.
    """
    if cfg.prior_lo.shape[0] != mdp.feature_dim:
        raise ValueError(f"prior box has dimension {cfg.prior_lo.shape[0]}, MDP features {mdp.feature_dim}")
    data.check_against(mdp)
    rng = np.random.default_rng(cfg.seed)
    state = initial_dbc_state(mdp, cfg, rng)

    theta_samples: list[np.ndarray] = []
    zeta_samples: list[np.ndarray] = []
    pool_ctx = ThreadPoolExecutor(max_workers=threads) if threads > 1 else contextlib.nullcontext()
    with pool_ctx as pool:
        for sweep in range(cfg.n_sweeps):
            state = dbc_sweep(mdp, data, state, cfg, rng, pool)
            if sweep >= cfg.burn_in:
                theta_samples.append(state.thetas)
                zeta_samples.append(state.zeta)
            if (sweep + 1) % 10 == 0 or sweep + 1 == cfg.n_sweeps:
                logger.info(
                    "DBC sweep %d/%d: mean ζ diagonal %.3f",
                    sweep + 1,
                    cfg.n_sweeps,
                    float(np.mean(np.diag(state.zeta))),
                )

        thetas = np.median(np.stack(theta_samples), axis=0)
        zeta = np.mean(np.stack(zeta_samples), axis=0)
        zeta = zeta / zeta.sum(axis=1, keepdims=True)
        model = SmdpModel(thetas, zeta, uniform_modes(cfg.num_modes), cfg.eta)
        log_policies = mode_log_policies(mdp, thetas, cfg.eta, cfg.vi_tol, cfg.vi_max_iter)
        sequences = tuple(seq for seq, _ in _decode_all(data, log_policies, model, pool))

    order = canonical_order(sequences, cfg.num_modes)
    model = SmdpModel(thetas[order], zeta[np.ix_(order, order)], model.initial_modes, cfg.eta)
    return DbcResult(
        model=model,
        sequences=tuple(_relabel(seq, order) for seq in sequences),
        policies=np.exp(log_policies[order]),
        theta_samples=np.stack(theta_samples)[:, order],
        zeta_samples=np.stack(zeta_samples)[:, order][:, :, order],
    )
