"""Shared fixtures: small random MDPs, brute-force policy evaluation and tiny run configs."""

from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np
import pytest
import yaml

from mooc_behavior.models import EventLog, EventRecord, Mdp


def random_mdp(rng: np.random.Generator, n_s: int, n_a: int, n_feat: int, nu: float = 0.9) -> Mdp:
    return Mdp(
        transitions=rng.dirichlet(np.ones(n_s), size=(n_s, n_a)),
        features=rng.normal(size=(n_s, n_a, n_feat)),
        discount=nu,
        initial_dist=rng.dirichlet(np.ones(n_s)),
    )


def enumerate_policy_values(mdp: Mdp, reward: np.ndarray) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """Exact V of every deterministic policy, by solving (I − νP_π) V = R_π."""
    n_s, n_a = mdp.num_states, mdp.num_actions
    idx = np.arange(n_s)
    policies = list(itertools.product(range(n_a), repeat=n_s))
    values = np.array(
        [
            np.linalg.solve(np.eye(n_s) - mdp.discount * mdp.transitions[idx, list(pi)], reward[idx, list(pi)])
            for pi in policies
        ]
    )
    return policies, values


@pytest.fixture
def make_mdp():
    return random_mdp


@pytest.fixture
def policy_values():
    return enumerate_policy_values


@pytest.fixture
def chain_mdp() -> Mdp:
    """One state, one action, φ = 1."""
    return Mdp(np.ones((1, 1, 1)), np.ones((1, 1, 1)), 0.9, np.ones(1))


@pytest.fixture
def two_state_mdp() -> Mdp:
    """Two states, two actions, one feature: the second action carries φ = 1."""
    transitions = np.array(
        [
            [[0.7, 0.3], [0.2, 0.8]],
            [[0.5, 0.5], [0.9, 0.1]],
        ]
    )
    features = np.array([[[0.0], [1.0]], [[0.0], [1.0]]])
    return Mdp(transitions, features, 0.5, np.array([0.5, 0.5]))


@pytest.fixture
def small_log() -> EventLog:
    """Two users; u2 comes back after a long break."""
    return EventLog(
        (
            EventRecord("u1", 0, "A", "goto_B"),
            EventRecord("u2", 500, "B", "read"),
            EventRecord("u1", 1_000, "B", "logout"),
            EventRecord("u2", 1_500, "A", "goto_B"),
            EventRecord("u2", 10_000_000, "C", "read"),
        )
    )


@pytest.fixture
def write_config(tmp_path: Path):
    """Write a flat YAML config into tmp_path and return its path."""

    def _write(**values) -> Path:
        path = tmp_path / "config.yaml"
        path.write_text(yaml.safe_dump(values), encoding="utf-8")
        return path

    return _write
