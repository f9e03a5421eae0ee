"""Data models for MOOC Behavior."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

PROB_TOL = 1e-9
REST_STATE = "__rest__"
IDLE_ACTION = "__idle__"


class Estimator(str, Enum):
    mean = "mean"
    median = "median"


class FeatureKind(str, Enum):
    indicator = "indicator"
    expert = "expert"


class ScenarioMode(str, Enum):
    static = "static"
    switched = "switched"


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=float, copy=True)
    out.flags.writeable = False
    return out


def validate_distribution(table: np.ndarray, what: str, tol: float = PROB_TOL) -> None:
    """Check that the last axis of ``table`` holds probability vectors. Raises ValueError."""
    if not np.all(np.isfinite(table)):
        raise ValueError(f"{what} contains non-finite entries")
    if np.any(table < 0):
        raise ValueError(f"{what} has negative entries")
    sums = table.sum(axis=-1)
    worst = float(np.max(np.abs(sums - 1.0))) if sums.size else 0.0
    if worst > tol:
        raise ValueError(f"{what} rows must sum to 1 (worst deviation {worst:.3e})")


@dataclass(frozen=True, eq=False)
class Mdp:
    """Finite reward-parametrized MDP: P(s,a,s'), φ(s,a), ν and X."""

    transitions: np.ndarray
    features: np.ndarray
    discount: float
    initial_dist: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.transitions, dtype=float)
        phi = np.asarray(self.features, dtype=float)
        x = np.asarray(self.initial_dist, dtype=float)
        if p.ndim != 3 or p.shape[0] != p.shape[2] or p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError(f"transitions must have shape (N_s, N_a, N_s), got {p.shape}")
        if phi.ndim != 3 or phi.shape[:2] != p.shape[:2] or phi.shape[2] < 1:
            raise ValueError(f"features must have shape (N_s, N_a, N), got {phi.shape}")
        if x.shape != (p.shape[0],):
            raise ValueError(f"initial_dist must have length {p.shape[0]}, got {x.shape}")
        if not 0.0 < float(self.discount) < 1.0:
            raise ValueError(f"discount must lie in (0, 1), got {self.discount}")
        validate_distribution(p, "transitions")
        validate_distribution(x, "initial_dist")
        object.__setattr__(self, "transitions", _frozen(p))
        object.__setattr__(self, "features", _frozen(phi))
        object.__setattr__(self, "initial_dist", _frozen(x))
        object.__setattr__(self, "discount", float(self.discount))

    @property
    def num_states(self) -> int:
        return int(self.transitions.shape[0])

    @property
    def num_actions(self) -> int:
        return int(self.transitions.shape[1])

    @property
    def feature_dim(self) -> int:
        return int(self.features.shape[2])


@dataclass(frozen=True, eq=False)
class RewardParams:
    """Weight vector θ of R_θ(s,a) = θ·φ(s,a)."""

    theta: np.ndarray

    def __post_init__(self) -> None:
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        if theta.ndim != 1:
            raise ValueError(f"theta must be a vector, got shape {theta.shape}")
        if not np.all(np.isfinite(theta)):
            raise ValueError("theta contains non-finite entries")
        object.__setattr__(self, "theta", _frozen(theta))

    @property
    def dim(self) -> int:
        return int(self.theta.shape[0])


@dataclass(frozen=True, eq=False)
class QFunction:
    """State-action value table Q(s,a); V(s) = max_a Q(s,a)."""

    values: np.ndarray

    def __post_init__(self) -> None:
        q = np.asarray(self.values, dtype=float)
        if q.ndim != 2:
            raise ValueError(f"Q table must be 2-D, got shape {q.shape}")
        if not np.all(np.isfinite(q)):
            raise ValueError("Q table contains non-finite entries")
        object.__setattr__(self, "values", _frozen(q))

    def state_values(self) -> np.ndarray:
        return self.values.max(axis=1)


@dataclass(frozen=True, eq=False)
class StochasticPolicy:
    """π(s,a) table, one probability row per state."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 2:
            raise ValueError(f"policy table must be 2-D, got shape {probs.shape}")
        validate_distribution(probs, "policy")
        object.__setattr__(self, "probs", _frozen(probs))

    @classmethod
    def deterministic(cls, actions: np.ndarray, num_actions: int) -> StochasticPolicy:
        actions = np.asarray(actions, dtype=int)
        probs = np.zeros((actions.shape[0], num_actions))
        probs[np.arange(actions.shape[0]), actions] = 1.0
        return cls(probs)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One user's ordered (state, action) observations."""

    user_id: str
    states: np.ndarray
    actions: np.ndarray

    def __post_init__(self) -> None:
        states = np.array(self.states, dtype=np.int64)
        actions = np.array(self.actions, dtype=np.int64)
        if states.ndim != 1 or states.shape != actions.shape:
            raise ValueError(f"trajectory {self.user_id}: states and actions must be equal-length vectors")
        if states.size < 1:
            raise ValueError(f"trajectory {self.user_id} is empty")
        if states.min() < 0 or actions.min() < 0:
            raise ValueError(f"trajectory {self.user_id} has negative indices")
        states.flags.writeable = False
        actions.flags.writeable = False
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "actions", actions)

    def __len__(self) -> int:
        return int(self.states.shape[0])

    @property
    def steps(self) -> list[tuple[int, int]]:
        return list(zip(self.states.tolist(), self.actions.tolist()))

    def check_against(self, mdp: Mdp) -> None:
        if self.states.max() >= mdp.num_states or self.actions.max() >= mdp.num_actions:
            raise ValueError(
                f"trajectory {self.user_id} references indices outside the MDP "
                f"({mdp.num_states} states, {mdp.num_actions} actions)"
            )


@dataclass(frozen=True, eq=False)
class TrajectoryDataset:
    """Collection of trajectories (D_M), in a fixed order."""

    trajectories: tuple[Trajectory, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "trajectories", tuple(self.trajectories))

    def __len__(self) -> int:
        return len(self.trajectories)

    def __iter__(self):
        return iter(self.trajectories)

    @property
    def user_ids(self) -> list[str]:
        """Distinct user ids in first-seen order."""
        return list(dict.fromkeys(t.user_id for t in self.trajectories))

    @property
    def num_steps(self) -> int:
        return sum(len(t) for t in self.trajectories)

    def for_user(self, user_id: str) -> TrajectoryDataset:
        return TrajectoryDataset(tuple(t for t in self.trajectories if t.user_id == user_id))

    def step_counts(self, num_states: int, num_actions: int) -> np.ndarray:
        """N_s × N_a table of how often each (s, a) pair was observed."""
        counts = np.zeros((num_states, num_actions))
        for traj in self.trajectories:
            np.add.at(counts, (traj.states, traj.actions), 1.0)
        return counts

    def check_against(self, mdp: Mdp) -> None:
        for traj in self.trajectories:
            traj.check_against(mdp)


@dataclass(frozen=True, eq=False)
class PosteriorSummary:
    """Output of one BIRL chain."""

    point_estimate: RewardParams
    samples: np.ndarray
    acceptance_rate: float
    log_likelihood_trace: np.ndarray


@dataclass(frozen=True, eq=False)
class LabeledSet:
    """Points θ_i with a subset of known class labels."""

    points: np.ndarray
    known_labels: dict[int, int]
    num_classes: int

    def __post_init__(self) -> None:
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if points.ndim != 2:
            raise ValueError(f"points must be an (M, N) table, got {points.shape}")
        m = points.shape[0]
        if self.num_classes < 1:
            raise ValueError("num_classes must be >= 1")
        if not 1 <= len(self.known_labels) <= m:
            raise ValueError(f"need between 1 and {m} labeled points, got {len(self.known_labels)}")
        for idx, label in self.known_labels.items():
            if not 0 <= idx < m:
                raise ValueError(f"labeled index {idx} out of range")
            if not 0 <= label < self.num_classes:
                raise ValueError(f"label {label} out of range for {self.num_classes} classes")
        object.__setattr__(self, "points", _frozen(points))
        object.__setattr__(self, "known_labels", dict(self.known_labels))

    @property
    def num_points(self) -> int:
        return int(self.points.shape[0])

    def labeled_mask(self) -> np.ndarray:
        mask = np.zeros(self.num_points, dtype=bool)
        mask[list(self.known_labels)] = True
        return mask

    def one_hot(self) -> np.ndarray:
        """Initial Y: one-hot rows for labeled points, 1/C elsewhere."""
        y = np.full((self.num_points, self.num_classes), 1.0 / self.num_classes)
        for idx, label in self.known_labels.items():
            y[idx] = 0.0
            y[idx, label] = 1.0
        return y


@dataclass(frozen=True, eq=False)
class LabelMatrix:
    """Class-probability rows Y (P^c)."""

    probs: np.ndarray
    delta_trace: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        validate_distribution(probs, "label matrix")
        object.__setattr__(self, "probs", _frozen(probs))
        object.__setattr__(self, "delta_trace", tuple(float(d) for d in self.delta_trace))

    def hard_labels(self) -> np.ndarray:
        return np.argmax(self.probs, axis=1)


@dataclass(frozen=True, eq=False)
class SmdpModel:
    """Switched MDP: L reward vectors, mode-transition matrix ζ, X_m and shared η."""

    thetas: np.ndarray
    zeta: np.ndarray
    initial_modes: np.ndarray
    eta: float

    def __post_init__(self) -> None:
        thetas = np.atleast_2d(np.asarray(self.thetas, dtype=float))
        zeta = np.atleast_2d(np.asarray(self.zeta, dtype=float))
        x_m = np.atleast_1d(np.asarray(self.initial_modes, dtype=float))
        num_modes = thetas.shape[0]
        if zeta.shape != (num_modes, num_modes):
            raise ValueError(f"zeta must be {num_modes}x{num_modes}, got {zeta.shape}")
        if x_m.shape != (num_modes,):
            raise ValueError(f"initial_modes must have length {num_modes}")
        if self.eta < 0:
            raise ValueError("eta must be >= 0")
        validate_distribution(zeta, "zeta")
        validate_distribution(x_m, "initial_modes")
        object.__setattr__(self, "thetas", _frozen(thetas))
        object.__setattr__(self, "zeta", _frozen(zeta))
        object.__setattr__(self, "initial_modes", _frozen(x_m))
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def num_modes(self) -> int:
        return int(self.thetas.shape[0])


@dataclass(frozen=True, eq=False)
class ModeSequence:
    """Decoded modes z_t aligned to a trajectory, with the per-step posterior maximum."""

    user_id: str
    modes: np.ndarray
    posterior_max: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        modes = np.array(self.modes, dtype=np.int64)
        post = np.array(self.posterior_max, dtype=float)
        if post.size == 0:
            post = np.ones(modes.shape[0])
        if post.shape != modes.shape:
            raise ValueError("posterior_max must align with modes")
        modes.flags.writeable = False
        post.flags.writeable = False
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "posterior_max", post)

    def __len__(self) -> int:
        return int(self.modes.shape[0])


@dataclass(frozen=True, eq=False)
class ModeStats:
    """F_ij: expected number of i→j mode transitions."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.atleast_2d(np.asarray(self.counts, dtype=float))
        if counts.shape[0] != counts.shape[1]:
            raise ValueError("mode statistics must be square")
        if np.any(counts < 0):
            raise ValueError("mode statistics must be non-negative")
        object.__setattr__(self, "counts", _frozen(counts))

    def __add__(self, other: ModeStats) -> ModeStats:
        return ModeStats(self.counts + other.counts)

    @classmethod
    def zeros(cls, num_modes: int) -> ModeStats:
        return cls(np.zeros((num_modes, num_modes)))


@dataclass(frozen=True)
class EventRecord:
    """One raw log line."""

    user: str
    ts: int
    page: str
    action: str

    def __post_init__(self) -> None:
        if self.ts < 0:
            raise ValueError(f"negative timestamp in record for user {self.user}")
        if not self.user or not self.page or not self.action:
            raise ValueError("user, page and action must be non-empty")


@dataclass(frozen=True)
class EventLog:
    """Raw records, sorted per user by timestamp (stable for ties)."""

    records: tuple[EventRecord, ...]

    def __post_init__(self) -> None:
        ordered = sorted(self.records, key=lambda r: r.ts)
        object.__setattr__(self, "records", tuple(ordered))

    def __len__(self) -> int:
        return len(self.records)

    def by_user(self) -> dict[str, list[EventRecord]]:
        """Records grouped per user, users in first-seen (timestamp) order."""
        users: dict[str, list[EventRecord]] = {}
        for rec in self.records:
            users.setdefault(rec.user, []).append(rec)
        return users


@dataclass(frozen=True)
class StateActionVocab:
    """Ordered state names (resting state first) and action names (idle first)."""

    state_names: tuple[str, ...]
    action_names: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "state_names", tuple(self.state_names))
        object.__setattr__(self, "action_names", tuple(self.action_names))
        if not self.state_names or self.state_names[0] != REST_STATE:
            raise ValueError(f"resting state {REST_STATE!r} must be state 0")
        if self.state_names.count(REST_STATE) != 1:
            raise ValueError("resting state must appear exactly once")
        if not self.action_names or self.action_names[0] != IDLE_ACTION:
            raise ValueError(f"idle action {IDLE_ACTION!r} must be action 0")
        if len(set(self.state_names)) != len(self.state_names):
            raise ValueError("state names must be unique")
        if len(set(self.action_names)) != len(self.action_names):
            raise ValueError("action names must be unique")

    @property
    def num_states(self) -> int:
        return len(self.state_names)

    @property
    def num_actions(self) -> int:
        return len(self.action_names)

    def state_index(self, name: str) -> int:
        return self.state_names.index(name)

    def action_index(self, name: str) -> int:
        return self.action_names.index(name)


@dataclass(frozen=True)
class FeatureSpec:
    """Feature map choice: indicator over S×A, or an expert table keyed by names."""

    kind: FeatureKind = FeatureKind.indicator
    names: tuple[str, ...] = ()
    table: dict[str, dict[str, tuple[float, ...]]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", FeatureKind(self.kind))
        object.__setattr__(self, "names", tuple(self.names))
        if self.kind == FeatureKind.expert:
            if not self.names:
                raise ValueError("expert features need named dimensions")
            for state, row in self.table.items():
                for action, vec in row.items():
                    if len(vec) != len(self.names):
                        raise ValueError(
                            f"feature vector for ({state}, {action}) has {len(vec)} entries, expected {len(self.names)}"
                        )

    def build(self, vocab: StateActionVocab) -> np.ndarray:
        """Materialise φ as an (N_s, N_a, N) table. Raises ValueError on an uncovered pair."""
        n_s, n_a = vocab.num_states, vocab.num_actions
        if self.kind == FeatureKind.indicator:
            return np.eye(n_s * n_a).reshape(n_s, n_a, n_s * n_a)
        phi = np.zeros((n_s, n_a, len(self.names)))
        wildcard = self.table.get("*", {})
        for s, state in enumerate(vocab.state_names):
            row = self.table.get(state, {})
            for a, action in enumerate(vocab.action_names):
                vec = row.get(action, wildcard.get(action))
                if vec is None:
                    raise ValueError(f"expert features do not cover ({state}, {action})")
                phi[s, a] = vec
        return phi

    def dimension_names(self, vocab: StateActionVocab) -> list[str]:
        if self.kind == FeatureKind.expert:
            return list(self.names)
        return [f"{s}|{a}" for s in vocab.state_names for a in vocab.action_names]
