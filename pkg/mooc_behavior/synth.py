"""Planted scenarios: synthetic course MDPs, rollouts and ground-truth sidecars."""

from __future__ import annotations

import dataclasses
import json
import logging
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .errors import ScenarioError
from .mdp import greedy_policy, mdp_vi, softmax_policy
from .models import (
    IDLE_ACTION,
    REST_STATE,
    FeatureKind,
    FeatureSpec,
    Mdp,
    ModeSequence,
    RewardParams,
    ScenarioMode,
    SmdpModel,
    StateActionVocab,
    Trajectory,
    TrajectoryDataset,
)
from .seeding import user_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PlantedScenario:
    """Known MDP plus planted parameters for a population of synthetic users.

    Static scenarios assign classes to users round-robin; switched scenarios
    draw each user's mode chain from ``smdp`` (or from a scripted ``pattern``).
    """

    name: str
    mode: ScenarioMode
    vocab: StateActionVocab
    features: FeatureSpec
    mdp: Mdp
    num_users: int
    steps_per_user: int
    eta: float
    seed: int = 0
    class_thetas: dict[str, np.ndarray] = field(default_factory=dict)
    smdp: SmdpModel | None = None
    pattern: str | None = None
    mode_names: tuple[str, ...] = ()
    description: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", ScenarioMode(self.mode))
        object.__setattr__(self, "mode_names", tuple(self.mode_names))
        if (self.mdp.num_states, self.mdp.num_actions) != (self.vocab.num_states, self.vocab.num_actions):
            raise ValueError(f"scenario {self.name}: MDP shape does not match its vocabulary")
        if self.num_users < 1 or self.steps_per_user < 1:
            raise ValueError(f"scenario {self.name}: num_users and steps_per_user must be positive")
        if self.eta < 0:
            raise ValueError(f"scenario {self.name}: eta must be >= 0")
        dim = self.mdp.feature_dim
        if self.mode == ScenarioMode.static:
            if not self.class_thetas:
                raise ValueError(f"static scenario {self.name} needs at least one class")
            thetas = {c: RewardParams(t).theta for c, t in self.class_thetas.items()}
            for cls, theta in thetas.items():
                if theta.shape[0] != dim:
                    raise ValueError(f"class {cls}: theta has dimension {theta.shape[0]}, features {dim}")
            object.__setattr__(self, "class_thetas", thetas)
        else:
            if self.smdp is None:
                raise ValueError(f"switched scenario {self.name} needs a planted switched model")
            if self.smdp.thetas.shape[1] != dim:
                raise ValueError(f"scenario {self.name}: mode thetas do not match feature dimension {dim}")
            if self.pattern is not None and self.pattern not in PATTERNS:
                raise ValueError(f"unknown mode pattern {self.pattern!r}")
            if self.mode_names and len(self.mode_names) != self.smdp.num_modes:
                raise ValueError(f"scenario {self.name}: {len(self.mode_names)} mode names for {self.smdp.num_modes} modes")

    @property
    def user_ids(self) -> list[str]:
        return [f"u{i:04d}" for i in range(self.num_users)]

    def user_classes(self) -> dict[str, str]:
        names = list(self.class_thetas)
        return {user: names[i % len(names)] for i, user in enumerate(self.user_ids)}

    def with_overrides(
        self,
        num_users: int | None = None,
        steps_per_user: int | None = None,
        seed: int | None = None,
    ) -> PlantedScenario:
        changes = {"num_users": num_users, "steps_per_user": steps_per_user, "seed": seed}
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """What was planted, keyed by user id; serialised beside the event log."""

    scenario: str
    mode: ScenarioMode
    user_ids: tuple[str, ...]
    dimension_names: tuple[str, ...]
    classes: dict[str, str] = field(default_factory=dict)
    thetas: dict[str, np.ndarray] = field(default_factory=dict)
    mode_thetas: np.ndarray | None = None
    zeta: np.ndarray | None = None
    sequences: dict[str, np.ndarray] = field(default_factory=dict)
    greedy_actions: tuple[dict[str, str], ...] = ()
    mode_names: tuple[str, ...] = ()

    def mode_sequences(self) -> tuple[ModeSequence, ...]:
        return tuple(ModeSequence(u, self.sequences[u]) for u in self.user_ids)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "scenario": self.scenario,
            "mode": self.mode.value,
            "user_ids": list(self.user_ids),
            "dimension_names": list(self.dimension_names),
        }
        if self.mode == ScenarioMode.static:
            data["classes"] = dict(self.classes)
            data["thetas"] = {u: t.tolist() for u, t in self.thetas.items()}
        else:
            data["mode_names"] = list(self.mode_names)
            data["mode_thetas"] = self.mode_thetas.tolist() if self.mode_thetas is not None else []
            data["zeta"] = self.zeta.tolist() if self.zeta is not None else []
            data["greedy_actions"] = [dict(g) for g in self.greedy_actions]
            data["sequences"] = {u: s.tolist() for u, s in self.sequences.items()}
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> GroundTruth:
        try:
            mode = ScenarioMode(data["mode"])
            common = {
                "scenario": data["scenario"],
                "mode": mode,
                "user_ids": tuple(data["user_ids"]),
                "dimension_names": tuple(data.get("dimension_names", ())),
            }
            if mode == ScenarioMode.static:
                return cls(
                    **common,
                    classes=dict(data["classes"]),
                    thetas={u: np.asarray(t, dtype=float) for u, t in data.get("thetas", {}).items()},
                )
            return cls(
                **common,
                mode_thetas=np.asarray(data["mode_thetas"], dtype=float),
                zeta=np.asarray(data["zeta"], dtype=float),
                sequences={u: np.asarray(s, dtype=np.int64) for u, s in data["sequences"].items()},
                greedy_actions=tuple(dict(g) for g in data.get("greedy_actions", [])),
                mode_names=tuple(data.get("mode_names", ())),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ScenarioError(f"Malformed ground-truth record: {e}") from None


# ---------------------------------------------------------------------------
# Rollouts
# ---------------------------------------------------------------------------


def boltzmann_table(mdp: Mdp, theta: np.ndarray, eta: float) -> np.ndarray:
    """π̃^η_θ as an N_s × N_a table."""
    return softmax_policy(mdp_vi(mdp, RewardParams(theta)), eta).probs


def _walk(
    mdp: Mdp,
    policies: np.ndarray,
    modes: np.ndarray,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    steps = modes.shape[0]
    states = np.empty(steps, dtype=np.int64)
    actions = np.empty(steps, dtype=np.int64)
    s = rng.choice(mdp.num_states, p=mdp.initial_dist)
    for t in range(steps):
        a = rng.choice(mdp.num_actions, p=policies[modes[t], s])
        states[t], actions[t] = s, a
        s = rng.choice(mdp.num_states, p=mdp.transitions[s, a])
    return states, actions


def _map_users(fn: Callable[[str], Any], users: list[str], threads: int) -> list[Any]:
    if threads <= 1:
        return [fn(u) for u in users]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, users))


def rollout_static(scenario: PlantedScenario, threads: int = 1) -> tuple[TrajectoryDataset, GroundTruth]:
    """s_0 ∼ X, a_t ∼ π̃^η_{θ*}(s_t, ·), s_{t+1} ∼ P(s_t, a_t, ·) for every user."""
    if scenario.mode != ScenarioMode.static:
        raise ValueError(f"scenario {scenario.name} is not static")
    classes = scenario.user_classes()
    class_policy = {c: boltzmann_table(scenario.mdp, t, scenario.eta) for c, t in scenario.class_thetas.items()}
    constant = np.zeros(scenario.steps_per_user, dtype=np.int64)

    def _one(user: str) -> Trajectory:
        rng = user_rng(scenario.seed, user)
        states, actions = _walk(scenario.mdp, class_policy[classes[user]][None], constant, rng)
        return Trajectory(user, states, actions)

    users = scenario.user_ids
    data = TrajectoryDataset(tuple(_map_users(_one, users, threads)))
    truth = GroundTruth(
        scenario=scenario.name,
        mode=ScenarioMode.static,
        user_ids=tuple(users),
        dimension_names=tuple(scenario.features.dimension_names(scenario.vocab)),
        classes=classes,
        thetas={u: scenario.class_thetas[classes[u]] for u in users},
    )
    logger.info("Rolled out %d static users × %d steps", len(users), scenario.steps_per_user)
    return data, truth


def markov_modes(model: SmdpModel, steps: int, rng: np.random.Generator) -> np.ndarray:
    """z_0 ∼ X_m, z_t ∼ ζ(z_{t−1}, ·)."""
    if model.num_modes == 1:
        return np.zeros(steps, dtype=np.int64)
    modes = np.empty(steps, dtype=np.int64)
    modes[0] = rng.choice(model.num_modes, p=model.initial_modes)
    for t in range(1, steps):
        modes[t] = rng.choice(model.num_modes, p=model.zeta[modes[t - 1]])
    return modes


def late_quitter_modes(steps: int, rng: np.random.Generator) -> np.ndarray:
    """Explore for 10-20% of the steps, alternate learn/certify blocks of 5-15 steps, explore again at the end.

    Modes: 0 = explore, 1 = learn, 2 = certify.
    """
    if steps < 3:
        raise ValueError("late_quitter pattern needs at least 3 steps")
    head = max(1, int(round(steps * rng.uniform(0.1, 0.2))))
    tail = max(1, int(round(steps * rng.uniform(0.1, 0.2))))
    middle = max(1, steps - head - tail)
    head = steps - tail - middle
    blocks: list[np.ndarray] = [np.zeros(head, dtype=np.int64)]
    current, filled = 1, 0
    while filled < middle:
        length = min(int(rng.integers(5, 16)), middle - filled)
        blocks.append(np.full(length, current, dtype=np.int64))
        filled += length
        current = 3 - current
    blocks.append(np.zeros(tail, dtype=np.int64))
    return np.concatenate(blocks)


PATTERNS: dict[str, Callable[[int, np.random.Generator], np.ndarray]] = {
    "late_quitter": late_quitter_modes,
}


def greedy_action_names(mdp: Mdp, vocab: StateActionVocab, theta: np.ndarray) -> dict[str, str]:
    actions = greedy_policy(mdp_vi(mdp, RewardParams(theta)))
    return {state: vocab.action_names[a] for state, a in zip(vocab.state_names, actions)}


def rollout_switched(scenario: PlantedScenario, threads: int = 1) -> tuple[TrajectoryDataset, GroundTruth]:
    """Per user: draw the mode chain, then emit steps from the policy of the active mode."""
    if scenario.mode != ScenarioMode.switched or scenario.smdp is None:
        raise ValueError(f"scenario {scenario.name} is not switched")
    model = scenario.smdp
    policies = np.stack([boltzmann_table(scenario.mdp, theta, model.eta) for theta in model.thetas])
    draw_modes = PATTERNS[scenario.pattern] if scenario.pattern else (lambda n, r: markov_modes(model, n, r))

    def _one(user: str) -> tuple[Trajectory, np.ndarray]:
        rng = user_rng(scenario.seed, user)
        modes = draw_modes(scenario.steps_per_user, rng)
        states, actions = _walk(scenario.mdp, policies, modes, rng)
        return Trajectory(user, states, actions), modes

    users = scenario.user_ids
    results = _map_users(_one, users, threads)
    data = TrajectoryDataset(tuple(traj for traj, _ in results))
    truth = GroundTruth(
        scenario=scenario.name,
        mode=ScenarioMode.switched,
        user_ids=tuple(users),
        dimension_names=tuple(scenario.features.dimension_names(scenario.vocab)),
        mode_thetas=model.thetas,
        zeta=model.zeta,
        sequences={u: modes for u, (_, modes) in zip(users, results)},
        greedy_actions=tuple(greedy_action_names(scenario.mdp, scenario.vocab, t) for t in model.thetas),
        mode_names=scenario.mode_names,
    )
    logger.info("Rolled out %d switched users × %d steps", len(users), scenario.steps_per_user)
    return data, truth


def simulate(scenario: PlantedScenario, threads: int = 1) -> tuple[TrajectoryDataset, GroundTruth]:
    if scenario.mode == ScenarioMode.static:
        return rollout_static(scenario, threads)
    return rollout_switched(scenario, threads)


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

COURSE_STATES = (REST_STATE, "intro", "ch1", "ch2", "ch3", "quiz1", "quiz2", "quiz3", "forum")
COURSE_ACTIONS = (IDLE_ACTION, "browse", "study", "quiz")
BROWSE_PAGES = ("intro", "ch1", "ch2", "ch3", "forum")
NEXT_CHAPTER = {
    REST_STATE: "intro",
    "intro": "ch1",
    "ch1": "ch2",
    "ch2": "ch3",
    "ch3": "ch3",
    "quiz1": "ch2",
    "quiz2": "ch3",
    "quiz3": "ch3",
    "forum": "intro",
}
QUIZ_FOR = {
    REST_STATE: "quiz1",
    "intro": "quiz1",
    "ch1": "quiz1",
    "ch2": "quiz2",
    "ch3": "quiz3",
    "quiz1": "quiz1",
    "quiz2": "quiz2",
    "quiz3": "quiz3",
    "forum": "quiz1",
}
BEHAVIOR_FEATURES = FeatureSpec(
    kind=FeatureKind.expert,
    names=("explore", "learn", "certify"),
    table={
        "*": {
            IDLE_ACTION: (0.0, 0.0, 0.0),
            "browse": (1.0, 0.0, 0.0),
            "study": (0.0, 1.0, 0.0),
            "quiz": (0.0, 0.0, 1.0),
        }
    },
)

PORTAL_STATES = (REST_STATE, "home", "video", "exercise", "forum")
PORTAL_ACTIONS = (IDLE_ACTION, "watch", "solve", "discuss")
PORTAL_TARGETS = {IDLE_ACTION: REST_STATE, "watch": "video", "solve": "exercise", "discuss": "forum"}

# Preferred action per portal state (__rest__, home, video, exercise, forum).
CLASS_PREFERENCES: dict[str, tuple[str, ...]] = {
    "Participant": ("watch", "watch", "solve", "watch", "watch"),
    "Collaborative": ("discuss", "discuss", "discuss", "discuss", "watch"),
    "Targeting": ("solve", "solve", "solve", "solve", "solve"),
    "Auditor": ("watch", "watch", "watch", "watch", "watch"),
    "Clicker": (IDLE_ACTION, "discuss", IDLE_ACTION, IDLE_ACTION, IDLE_ACTION),
    "Big Starter": ("watch", "watch", "watch", IDLE_ACTION, IDLE_ACTION),
    "Late Quitter": ("watch", "solve", "solve", "watch", IDLE_ACTION),
}

NOISE = 0.1


def course_mdp(nu: float = 0.9) -> tuple[StateActionVocab, Mdp]:
    """Nine-page course: chapters in sequence, one quiz per chapter, a forum and the resting state."""
    vocab = StateActionVocab(COURSE_STATES, COURSE_ACTIONS)
    n_s, n_a = vocab.num_states, vocab.num_actions
    rest = vocab.state_index(REST_STATE)
    designed = np.zeros((n_s, n_a, n_s))
    for s, name in enumerate(COURSE_STATES):
        designed[s, 0, rest] += 0.9
        designed[s, 0, s] += 0.1
        for page in BROWSE_PAGES:
            designed[s, vocab.action_index("browse"), vocab.state_index(page)] = 1.0 / len(BROWSE_PAGES)
        designed[s, vocab.action_index("study"), vocab.state_index(NEXT_CHAPTER[name])] = 1.0
        designed[s, vocab.action_index("quiz"), vocab.state_index(QUIZ_FOR[name])] = 1.0
    transitions = (1.0 - NOISE) * designed + NOISE / n_s
    initial = np.zeros(n_s)
    initial[[vocab.state_index("intro"), vocab.state_index("ch1"), vocab.state_index("forum")]] = (0.5, 0.25, 0.25)
    return vocab, Mdp(transitions, BEHAVIOR_FEATURES.build(vocab), nu, initial)


def portal_mdp(nu: float = 0.9) -> tuple[StateActionVocab, Mdp]:
    """Five-page portal where every action mostly lands on its own page."""
    vocab = StateActionVocab(PORTAL_STATES, PORTAL_ACTIONS)
    n_s = vocab.num_states
    designed = np.zeros((n_s, vocab.num_actions, n_s))
    for a, action in enumerate(PORTAL_ACTIONS):
        designed[:, a, vocab.state_index(PORTAL_TARGETS[action])] = 1.0
    transitions = (1.0 - 2 * NOISE) * designed + 2 * NOISE / n_s
    initial = np.zeros(n_s)
    initial[[vocab.state_index("home"), vocab.state_index("video"), vocab.state_index("forum")]] = (0.6, 0.2, 0.2)
    indicator = FeatureSpec(kind=FeatureKind.indicator)
    return vocab, Mdp(transitions, indicator.build(vocab), nu, initial)


def class_theta(vocab: StateActionVocab, preferred: tuple[str, ...]) -> np.ndarray:
    """Indicator-space θ*: +1 on each state's preferred action, −1 elsewhere."""
    theta = -np.ones((vocab.num_states, vocab.num_actions))
    for s, action in enumerate(preferred):
        theta[s, vocab.action_index(action)] = 1.0
    return theta.ravel()


def sticky_zeta(num_modes: int, stay: float) -> np.ndarray:
    if num_modes == 1:
        return np.ones((1, 1))
    return np.where(np.eye(num_modes, dtype=bool), stay, (1.0 - stay) / (num_modes - 1))


def _three_modes() -> PlantedScenario:
    vocab, mdp = course_mdp()
    return PlantedScenario(
        name="three_modes",
        mode=ScenarioMode.switched,
        vocab=vocab,
        features=BEHAVIOR_FEATURES,
        mdp=mdp,
        num_users=50,
        steps_per_user=100,
        eta=5.0,
        smdp=SmdpModel(np.eye(3), sticky_zeta(3, 0.9), np.full(3, 1.0 / 3), 5.0),
        mode_names=("explore", "learn", "certify"),
        description="Explore / learn / certify modes with sticky switching",
    )


def _late_quitter() -> PlantedScenario:
    vocab, mdp = course_mdp()
    return PlantedScenario(
        name="late_quitter",
        mode=ScenarioMode.switched,
        vocab=vocab,
        features=BEHAVIOR_FEATURES,
        mdp=mdp,
        num_users=30,
        steps_per_user=120,
        eta=5.0,
        smdp=SmdpModel(np.eye(3), sticky_zeta(3, 0.9), np.array([1.0, 0.0, 0.0]), 5.0),
        pattern="late_quitter",
        mode_names=("explore", "learn", "certify"),
        description="Explore first, oscillate between learning and certification, explore again before leaving",
    )


def _static_preset(name: str, classes: list[str], num_users: int, description: str) -> PlantedScenario:
    vocab, mdp = portal_mdp()
    return PlantedScenario(
        name=name,
        mode=ScenarioMode.static,
        vocab=vocab,
        features=FeatureSpec(kind=FeatureKind.indicator),
        mdp=mdp,
        num_users=num_users,
        steps_per_user=200,
        eta=5.0,
        class_thetas={c: class_theta(vocab, CLASS_PREFERENCES[c]) for c in classes},
        description=description,
    )


PRESETS: dict[str, Callable[[], PlantedScenario]] = {
    "three_modes": _three_modes,
    "late_quitter": _late_quitter,
    "two_classes": lambda: _static_preset(
        "two_classes", ["Participant", "Clicker"], 40, "Two planted behavior classes on the portal MDP"
    ),
    "seven_classes": lambda: _static_preset(
        "seven_classes", list(CLASS_PREFERENCES), 70, "Seven planted classes named after the expert archetypes"
    ),
}


def preset_archetypes() -> list[PlantedScenario]:
    return [build() for build in PRESETS.values()]


def get_preset(name: str) -> PlantedScenario:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ScenarioError(f"Unknown preset {name!r}; available: {', '.join(PRESETS)}") from None


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def scenario_to_dict(scenario: PlantedScenario) -> dict[str, Any]:
    features: dict[str, Any] = {"kind": scenario.features.kind.value}
    if scenario.features.kind == FeatureKind.expert:
        features["names"] = list(scenario.features.names)
        features["table"] = {s: {a: list(v) for a, v in row.items()} for s, row in scenario.features.table.items()}
    data: dict[str, Any] = {
        "name": scenario.name,
        "mode": scenario.mode.value,
        "description": scenario.description,
        "num_users": scenario.num_users,
        "steps_per_user": scenario.steps_per_user,
        "eta": scenario.eta,
        "seed": scenario.seed,
        "discount": scenario.mdp.discount,
        "states": list(scenario.vocab.state_names),
        "actions": list(scenario.vocab.action_names),
        "features": features,
        "transitions": scenario.mdp.transitions.tolist(),
        "initial_dist": scenario.mdp.initial_dist.tolist(),
    }
    if scenario.mode == ScenarioMode.static:
        data["classes"] = {c: t.tolist() for c, t in scenario.class_thetas.items()}
    elif scenario.smdp is not None:
        data["modes"] = {
            "names": list(scenario.mode_names),
            "thetas": scenario.smdp.thetas.tolist(),
            "zeta": scenario.smdp.zeta.tolist(),
            "initial": scenario.smdp.initial_modes.tolist(),
            "pattern": scenario.pattern,
        }
    return data


def scenario_from_dict(data: dict[str, Any]) -> PlantedScenario:
    try:
        vocab = StateActionVocab(tuple(data["states"]), tuple(data["actions"]))
        feat = data.get("features", {"kind": "indicator"})
        if FeatureKind(feat["kind"]) == FeatureKind.expert:
            table = {s: {a: tuple(float(x) for x in v) for a, v in row.items()} for s, row in feat["table"].items()}
            features = FeatureSpec(kind=FeatureKind.expert, names=tuple(feat["names"]), table=table)
        else:
            features = FeatureSpec(kind=FeatureKind.indicator)
        mdp = Mdp(
            transitions=np.asarray(data["transitions"], dtype=float),
            features=features.build(vocab),
            discount=float(data.get("discount", 0.9)),
            initial_dist=np.asarray(data["initial_dist"], dtype=float),
        )
        eta = float(data["eta"])
        common: dict[str, Any] = {
            "name": str(data["name"]),
            "mode": ScenarioMode(data["mode"]),
            "vocab": vocab,
            "features": features,
            "mdp": mdp,
            "num_users": int(data["num_users"]),
            "steps_per_user": int(data["steps_per_user"]),
            "eta": eta,
            "seed": int(data.get("seed", 0)),
            "description": str(data.get("description", "")),
        }
        if common["mode"] == ScenarioMode.static:
            classes = {str(c): np.asarray(t, dtype=float) for c, t in data["classes"].items()}
            return PlantedScenario(**common, class_thetas=classes)
        modes = data["modes"]
        smdp = SmdpModel(
            np.asarray(modes["thetas"], dtype=float),
            np.asarray(modes["zeta"], dtype=float),
            np.asarray(modes["initial"], dtype=float),
            eta,
        )
        return PlantedScenario(
            **common,
            smdp=smdp,
            pattern=modes.get("pattern"),
            mode_names=tuple(modes.get("names", ())),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ScenarioError(f"Malformed scenario: {e}") from None


def save_scenario(scenario: PlantedScenario, path: str | Path) -> None:
    Path(path).write_text(
        yaml.safe_dump(scenario_to_dict(scenario), default_flow_style=None, sort_keys=False, allow_unicode=True),
        encoding="utf-8",
    )


def load_scenario(path: str | Path) -> PlantedScenario:
    p = Path(path)
    if not p.exists():
        raise ScenarioError(f"Scenario file not found: {p}")
    with open(p, encoding="utf-8") as f:
        data = yaml.safe_load(f)
    if not isinstance(data, dict):
        raise ScenarioError(f"Scenario file {p} must contain a mapping")
    return scenario_from_dict(data)


def save_truth(truth: GroundTruth, path: str | Path) -> None:
    Path(path).write_text(json.dumps(truth.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def load_truth(path: str | Path) -> GroundTruth:
    p = Path(path)
    if not p.exists():
        raise ScenarioError(f"Ground-truth file not found: {p}")
    with open(p, encoding="utf-8") as f:
        return GroundTruth.from_dict(json.load(f))
