"""MOOC MDP construction from event logs and the static behavior clustering (SBC) pipeline."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .birl import run_birl_many
from .config import BirlConfig
from .errors import IngestionError, LabelError
from .label_prop import DEFAULT_MAX_ITER, DEFAULT_TOL, default_sigma, label_prop
from .models import (
    IDLE_ACTION,
    REST_STATE,
    EventLog,
    FeatureSpec,
    LabeledSet,
    LabelMatrix,
    Mdp,
    PosteriorSummary,
    StateActionVocab,
    Trajectory,
    TrajectoryDataset,
)

logger = logging.getLogger(__name__)

DEFAULT_NU = 0.9
DEFAULT_SESSION_GAP_MS = 30 * 60 * 1000


def build_vocab(log: EventLog) -> StateActionVocab:
    """Resting state, then pages in global first-seen order; idle action, then actions in first-seen order."""
    if len(log) == 0:
        raise IngestionError("Cannot build a vocabulary from an empty event log")
    pages = dict.fromkeys([REST_STATE])
    actions = dict.fromkeys([IDLE_ACTION])
    for rec in log.records:
        pages.setdefault(rec.page)
        actions.setdefault(rec.action)
    return StateActionVocab(state_names=tuple(pages), action_names=tuple(actions))


def events_frame(log: EventLog) -> pd.DataFrame:
    """Records as a DataFrame in timestamp order (ties keep input order)."""
    return pd.DataFrame(
        {
            "user": [r.user for r in log.records],
            "ts": np.array([r.ts for r in log.records], dtype=np.int64),
            "page": [r.page for r in log.records],
            "action": [r.action for r in log.records],
        }
    )


def sessionize(log: EventLog, session_gap_ms: int = DEFAULT_SESSION_GAP_MS) -> pd.DataFrame:
    """Attach ``is_new_session`` and a per-user ``session_index`` (0-based).

    A record opens a new session when it is the user's first or when more than
    ``session_gap_ms`` elapsed since the user's previous record.
    """
    if session_gap_ms <= 0:
        raise ValueError("session_gap_ms must be positive")
    df = events_frame(log)
    df["prev_ts"] = df.groupby("user", sort=False)["ts"].shift(1)
    df["gap_ms"] = df["ts"] - df["prev_ts"]
    df["is_new_session"] = df["prev_ts"].isna() | (df["gap_ms"] > session_gap_ms)
    df["session_index"] = df.groupby("user", sort=False)["is_new_session"].cumsum().astype(np.int64) - 1
    return df


def _index_column(df: pd.DataFrame, column: str, names: tuple[str, ...], log: EventLog, kind: str) -> np.ndarray:
    lookup = {name: i for i, name in enumerate(names)}
    idx = df[column].map(lookup)
    miss = idx.isna()
    if miss.any():
        row = int(np.flatnonzero(miss.to_numpy())[0])
        raise IngestionError(f"{kind} {df[column].iloc[row]!r} is not in the vocabulary", log.records[row])
    return idx.to_numpy(dtype=np.int64)


def _empirical_kernel(counts: np.ndarray) -> np.ndarray:
    """Add-one smoothing over observed successors; never-observed (s, a) rows become self-loops."""
    smoothed = np.where(counts > 0, counts + 1.0, 0.0)
    totals = smoothed.sum(axis=2, keepdims=True)
    kernel = np.divide(smoothed, totals, out=np.zeros_like(smoothed), where=totals > 0)
    unseen_s, unseen_a = np.nonzero(totals[:, :, 0] == 0)
    kernel[unseen_s, unseen_a, unseen_s] = 1.0
    return kernel


def build_mdp(
    log: EventLog,
    vocab: StateActionVocab,
    spec: FeatureSpec,
    nu: float = DEFAULT_NU,
    session_gap_ms: int = DEFAULT_SESSION_GAP_MS,
) -> tuple[Mdp, TrajectoryDataset]:
    """Empirical MDP and per-user trajectories from a raw log.

    Each session gap inserts one (resting, idle) step; the last step of a user
    transitions to the resting state. X is the distribution of session-start pages.
    """
    if not 0.0 < nu < 1.0:
        raise ValueError(f"nu must lie in (0, 1), got {nu}")
    if len(log) == 0:
        raise IngestionError("Cannot build an MDP from an empty event log")

    df = sessionize(log, session_gap_ms)
    df["s"] = _index_column(df, "page", vocab.state_names, log, "page")
    df["a"] = _index_column(df, "action", vocab.action_names, log, "action")
    rest, idle = vocab.state_index(REST_STATE), vocab.action_index(IDLE_ACTION)
    n_s, n_a = vocab.num_states, vocab.num_actions

    counts = np.zeros((n_s, n_a, n_s))
    trajectories: list[Trajectory] = []
    for user, group in df.groupby("user", sort=False):
        breaks = np.flatnonzero(group["is_new_session"].to_numpy())[1:]
        states = np.insert(group["s"].to_numpy(), breaks, rest)
        actions = np.insert(group["a"].to_numpy(), breaks, idle)
        successors = np.append(states[1:], rest)
        np.add.at(counts, (states, actions, successors), 1.0)
        trajectories.append(Trajectory(str(user), states, actions))

    starts = df.loc[df["is_new_session"], "s"].to_numpy()
    initial = np.bincount(starts, minlength=n_s) / starts.shape[0]

    try:
        features = spec.build(vocab)
    except ValueError as e:
        raise IngestionError(str(e)) from None

    mdp = Mdp(transitions=_empirical_kernel(counts), features=features, discount=nu, initial_dist=initial)
    data = TrajectoryDataset(tuple(trajectories))
    logger.info(
        "Built MDP: %d states, %d actions, %d features; %d users, %d steps, %d sessions",
        n_s,
        n_a,
        mdp.feature_dim,
        len(data),
        data.num_steps,
        int(df["is_new_session"].sum()),
    )
    return mdp, data


@dataclass(frozen=True, eq=False)
class SbcResult:
    """Per-user posteriors, class probabilities and the bookkeeping of one SBC run."""

    user_ids: tuple[str, ...]
    class_names: tuple[str, ...]
    labels: LabelMatrix
    posteriors: dict[str, PosteriorSummary]
    labeled_users: tuple[str, ...]
    excluded: tuple[str, ...]
    sigma: float

    @property
    def thetas(self) -> np.ndarray:
        return np.stack([self.posteriors[u].point_estimate.theta for u in self.user_ids])

    @property
    def hard_labels(self) -> list[str]:
        return [self.class_names[k] for k in self.labels.hard_labels()]


def check_label_coverage(known: dict[str, str], users: list[str]) -> tuple[dict[str, str], list[str]]:
    """Split labels into those of present users and absent users; every class needs a present user."""
    present_users = set(users)
    present = {u: c for u, c in known.items() if u in present_users}
    absent = [u for u in known if u not in present_users]
    for user in absent:
        logger.warning("Labeled user %s has no trajectory, excluded", user)
    uncovered = [c for c in dict.fromkeys(known.values()) if c not in set(present.values())]
    if not known:
        raise LabelError("Label file names no users")
    if uncovered:
        raise LabelError(f"No labeled user present in the data for class(es): {', '.join(uncovered)}")
    return present, absent


def run_sbc(
    mdp: Mdp,
    data: TrajectoryDataset,
    known: dict[str, str],
    birl_cfg: BirlConfig,
    lp_sigma: float | None = None,
    lp_tol: float = DEFAULT_TOL,
    lp_max_iter: int = DEFAULT_MAX_ITER,
    threads: int = 1,
) -> SbcResult:
    """Per-user BIRL, then label propagation over the point estimates.

    Classes are ordered by first appearance in ``known``. Label coverage is
    checked before any chain runs.
    """
    users = data.user_ids
    present, absent = check_label_coverage(known, users)
    class_names = tuple(dict.fromkeys(known.values()))
    class_index = {c: k for k, c in enumerate(class_names)}

    posteriors = run_birl_many(mdp, data, birl_cfg, threads=threads)
    points = np.stack([posteriors[u].point_estimate.theta for u in users])
    row_of = {u: i for i, u in enumerate(users)}
    labeled = LabeledSet(
        points=points,
        known_labels={row_of[u]: class_index[c] for u, c in present.items()},
        num_classes=len(class_names),
    )
    sigma = default_sigma(points) if lp_sigma is None else lp_sigma
    labels = label_prop(labeled, sigma=sigma, tol=lp_tol, max_iter=lp_max_iter)
    logger.info(
        "SBC: %d users, %d labeled, %d classes, σ_LP = %.4g",
        len(users),
        len(present),
        len(class_names),
        sigma,
    )
    return SbcResult(
        user_ids=tuple(users),
        class_names=class_names,
        labels=labels,
        posteriors=posteriors,
        labeled_users=tuple(present),
        excluded=tuple(absent),
        sigma=float(sigma),
    )
