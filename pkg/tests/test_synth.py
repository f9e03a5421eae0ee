"""Tests for planted scenarios, rollouts and their serialisation."""

import numpy as np
import pytest

from mooc_behavior.errors import ScenarioError
from mooc_behavior.exporters import write_event_log
from mooc_behavior.models import (
    IDLE_ACTION,
    REST_STATE,
    FeatureKind,
    FeatureSpec,
    Mdp,
    ScenarioMode,
    SmdpModel,
    StateActionVocab,
)
from mooc_behavior.mooc_model import build_mdp
from mooc_behavior.parser import load_event_log
from mooc_behavior.synth import (
    PRESETS,
    PlantedScenario,
    boltzmann_table,
    get_preset,
    late_quitter_modes,
    load_scenario,
    load_truth,
    markov_modes,
    portal_mdp,
    preset_archetypes,
    rollout_static,
    rollout_switched,
    save_scenario,
    save_truth,
    scenario_from_dict,
    scenario_to_dict,
    simulate,
    sticky_zeta,
)

INDICATOR = FeatureSpec(kind=FeatureKind.indicator)
RING_VOCAB = StateActionVocab((REST_STATE, "x", "y"), (IDLE_ACTION, "skip"))


def _ring_mdp() -> Mdp:
    """Three states on a ring: action 0 steps once, action 1 steps twice."""
    transitions = np.zeros((3, 2, 3))
    for s in range(3):
        for a in range(2):
            transitions[s, a, (s + 1 + a) % 3] = 1.0
    return Mdp(transitions, INDICATOR.build(RING_VOCAB), 0.9, np.full(3, 1 / 3))


def _ring_theta(stay: float) -> np.ndarray:
    return np.tile([stay, -stay], 3)


def _static(mdp: Mdp, vocab: StateActionVocab, theta: np.ndarray, eta: float, users: int, steps: int, seed=0):
    return PlantedScenario(
        name="test",
        mode=ScenarioMode.static,
        vocab=vocab,
        features=INDICATOR,
        mdp=mdp,
        num_users=users,
        steps_per_user=steps,
        eta=eta,
        seed=seed,
        class_thetas={"only": theta},
    )


def _switched(mdp, vocab, thetas, zeta, eta: float, users: int, steps: int, seed=0):
    num_modes = thetas.shape[0]
    return PlantedScenario(
        name="test",
        mode=ScenarioMode.switched,
        vocab=vocab,
        features=INDICATOR,
        mdp=mdp,
        num_users=users,
        steps_per_user=steps,
        eta=eta,
        seed=seed,
        smdp=SmdpModel(thetas, zeta, np.full(num_modes, 1 / num_modes), eta),
    )


class TestStaticRollout:
    def test_zero_eta_picks_actions_uniformly(self):
        vocab, mdp = portal_mdp()
        data, _ = rollout_static(_static(mdp, vocab, np.zeros(mdp.feature_dim), 0.0, 50, 250))
        actions = np.concatenate([t.actions for t in data])
        n = actions.shape[0]
        counts = np.bincount(actions, minlength=4)
        sd = np.sqrt(n * 0.25 * 0.75)
        assert np.all(np.abs(counts - n / 4) <= 3 * sd)

    def test_huge_eta_follows_greedy_path(self):
        mdp = _ring_mdp()
        data, _ = rollout_static(_static(mdp, RING_VOCAB, _ring_theta(1.0), 1e6, 5, 40))
        for traj in data:
            assert np.all(traj.actions == 0)
            assert np.all(traj.states[1:] == (traj.states[:-1] + 1) % 3)

    def test_action_frequencies_follow_boltzmann_policy(self):
        mdp = _ring_mdp()
        theta = _ring_theta(0.1)
        data, _ = rollout_static(_static(mdp, RING_VOCAB, theta, 1.0, 1, 15_000))
        traj = data.trajectories[0]
        at_state = traj.actions[traj.states == 1]
        assert at_state.shape[0] >= 4000
        p = boltzmann_table(mdp, theta, 1.0)[1, 0]
        n = at_state.shape[0]
        assert abs(np.sum(at_state == 0) - n * p) <= 3 * np.sqrt(n * p * (1 - p))

    def test_observed_transitions_have_support(self):
        mdp = _ring_mdp()
        data, _ = rollout_static(_static(mdp, RING_VOCAB, _ring_theta(0.3), 1.0, 4, 100))
        for traj in data:
            assert np.all(mdp.transitions[traj.states[:-1], traj.actions[:-1], traj.states[1:]] > 0)

    def test_truth_lists_every_user(self):
        scenario = get_preset("two_classes").with_overrides(num_users=5, steps_per_user=10)
        data, truth = rollout_static(scenario)
        assert list(truth.user_ids) == data.user_ids == scenario.user_ids
        assert [truth.classes[u] for u in truth.user_ids] == [
            "Participant",
            "Clicker",
            "Participant",
            "Clicker",
            "Participant",
        ]
        assert all(len(t) == 10 for t in data)


class TestSwitchedRollout:
    def test_identity_zeta_never_switches(self):
        vocab, mdp = portal_mdp()
        thetas = np.random.default_rng(0).uniform(-1, 1, size=(3, mdp.feature_dim))
        _, truth = rollout_switched(_switched(mdp, vocab, thetas, np.eye(3), 2.0, 10, 30))
        for seq in truth.sequences.values():
            assert np.all(seq == seq[0])

    def test_single_mode_reduces_to_static(self):
        vocab, mdp = portal_mdp()
        theta = np.random.default_rng(1).uniform(-1, 1, size=mdp.feature_dim)
        static, _ = rollout_static(_static(mdp, vocab, theta, 3.0, 4, 50, seed=9))
        switched, truth = rollout_switched(_switched(mdp, vocab, theta[None], np.ones((1, 1)), 3.0, 4, 50, seed=9))
        for a, b in zip(static, switched):
            assert np.array_equal(a.states, b.states)
            assert np.array_equal(a.actions, b.actions)
        assert all(np.all(s == 0) for s in truth.sequences.values())

    def test_sticky_transition_frequencies(self):
        model = SmdpModel(np.eye(3), sticky_zeta(3, 0.95), np.full(3, 1 / 3), 1.0)
        modes = markov_modes(model, 10_000, np.random.default_rng(2))
        counts = np.zeros((3, 3))
        np.add.at(counts, (modes[:-1], modes[1:]), 1)
        freq = counts / counts.sum(axis=1, keepdims=True)
        assert np.allclose(freq, model.zeta, atol=0.02)

    def test_late_quitter_pattern(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            modes = late_quitter_modes(120, rng)
            assert modes.shape == (120,)
            assert modes[0] == 0 and modes[-1] == 0
            inner = np.flatnonzero(modes != 0)
            assert inner.size > 0
            assert np.all(modes[inner[0] : inner[-1] + 1] != 0)
            assert 12 <= inner[0] <= 24

    def test_truth_greedy_actions_per_mode(self):
        scenario = get_preset("three_modes").with_overrides(num_users=2, steps_per_user=10)
        _, truth = simulate(scenario)
        assert [set(g.values()) for g in truth.greedy_actions] == [{"browse"}, {"study"}, {"quiz"}]


class TestPresets:
    def test_three_modes(self):
        scenario = get_preset("three_modes")
        assert np.array_equal(scenario.smdp.thetas, np.eye(3))
        assert np.allclose(np.diag(scenario.smdp.zeta), 0.9)
        assert (scenario.num_users, scenario.steps_per_user, scenario.eta) == (50, 100, 5.0)
        assert scenario.mode_names == ("explore", "learn", "certify")

    def test_late_quitter(self):
        scenario = get_preset("late_quitter")
        assert scenario.pattern == "late_quitter"
        assert scenario.smdp.initial_modes.tolist() == [1.0, 0.0, 0.0]

    def test_static_presets(self):
        assert list(get_preset("two_classes").class_thetas) == ["Participant", "Clicker"]
        seven = get_preset("seven_classes")
        assert len(seven.class_thetas) == 7
        assert seven.num_users == 70

    def test_archetypes_cover_every_preset(self):
        archetypes = preset_archetypes()
        assert [s.name for s in archetypes] == list(PRESETS)
        modes = {s.name: s.mode for s in archetypes}
        assert modes["three_modes"] == modes["late_quitter"] == ScenarioMode.switched
        assert modes["two_classes"] == modes["seven_classes"] == ScenarioMode.static

    def test_unknown_preset(self):
        with pytest.raises(ScenarioError) as exc:
            get_preset("nope")
        for name in PRESETS:
            assert name in str(exc.value)

    @pytest.mark.parametrize("name", list(PRESETS))
    def test_dict_round_trip(self, name):
        scenario = get_preset(name)
        restored = scenario_from_dict(scenario_to_dict(scenario))
        assert restored.name == scenario.name
        assert restored.mode == scenario.mode
        assert np.array_equal(restored.mdp.transitions, scenario.mdp.transitions)
        assert np.array_equal(restored.mdp.features, scenario.mdp.features)
        if scenario.mode == ScenarioMode.static:
            assert list(restored.class_thetas) == list(scenario.class_thetas)
        else:
            assert np.array_equal(restored.smdp.zeta, scenario.smdp.zeta)
            assert restored.pattern == scenario.pattern

    def test_yaml_round_trip_simulates_identically(self, tmp_path):
        scenario = get_preset("three_modes").with_overrides(num_users=3, steps_per_user=20, seed=4)
        save_scenario(scenario, tmp_path / "scenario.yaml")
        a, _ = simulate(scenario)
        b, _ = simulate(load_scenario(tmp_path / "scenario.yaml"))
        for x, y in zip(a, b):
            assert np.array_equal(x.states, y.states)
            assert np.array_equal(x.actions, y.actions)

    def test_malformed_scenario(self):
        with pytest.raises(ScenarioError):
            scenario_from_dict({"name": "broken"})


class TestDeterminism:
    def test_same_seed_same_rollout(self):
        scenario = get_preset("three_modes").with_overrides(num_users=6, steps_per_user=25, seed=11)
        a, ta = simulate(scenario, threads=1)
        b, tb = simulate(scenario, threads=4)
        for x, y in zip(a, b):
            assert np.array_equal(x.states, y.states)
            assert np.array_equal(x.actions, y.actions)
        for user in ta.user_ids:
            assert np.array_equal(ta.sequences[user], tb.sequences[user])

    def test_different_seed_differs(self):
        scenario = get_preset("two_classes").with_overrides(num_users=2, steps_per_user=50)
        a, _ = simulate(scenario.with_overrides(seed=1))
        b, _ = simulate(scenario.with_overrides(seed=2))
        assert not np.array_equal(a.trajectories[0].states, b.trajectories[0].states)

    def test_event_log_bytes_and_reingestion(self, tmp_path):
        scenario = get_preset("three_modes").with_overrides(num_users=3, steps_per_user=15, seed=5)
        data, _ = simulate(scenario)
        assert write_event_log(data, scenario.vocab, tmp_path / "a.jsonl") == 45
        write_event_log(data, scenario.vocab, tmp_path / "b.jsonl")
        assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()

        _, rebuilt = build_mdp(load_event_log(tmp_path / "a.jsonl"), scenario.vocab, scenario.features)
        for x, y in zip(data, rebuilt):
            assert x.user_id == y.user_id
            assert np.array_equal(x.states, y.states)
            assert np.array_equal(x.actions, y.actions)

    def test_truth_json_round_trip(self, tmp_path):
        scenario = get_preset("late_quitter").with_overrides(num_users=3, steps_per_user=30)
        _, truth = simulate(scenario)
        save_truth(truth, tmp_path / "truth.json")
        restored = load_truth(tmp_path / "truth.json")
        assert restored.user_ids == truth.user_ids
        assert np.array_equal(restored.zeta, truth.zeta)
        for user in truth.user_ids:
            assert np.array_equal(restored.sequences[user], truth.sequences[user])
        assert restored.greedy_actions == truth.greedy_actions
