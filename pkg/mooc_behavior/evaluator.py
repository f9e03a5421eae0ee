"""Scoring of SBC / DBC runs against planted ground truth."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from scipy.optimize import linear_sum_assignment

from .errors import EvaluationError
from .exporters.csv_writer import read_class_probs, read_mode_policies, read_zeta
from .exporters.jsonl_writer import read_mode_sequences
from .models import ModeSequence, ScenarioMode
from .synth import GroundTruth, load_truth

logger = logging.getLogger(__name__)


@dataclass
class EvalReport:
    """Result of comparing one run with its planted truth."""

    kind: str
    num_users: int
    accuracy: float
    num_steps: int = 0
    confusion: dict[str, dict[str, int]] = field(default_factory=dict)
    mode_mapping: dict[int, int] = field(default_factory=dict)
    policy_agreement: dict[int, float] = field(default_factory=dict)
    boundary_agreement: float | None = None
    zeta_diagonal_mean: float | None = None
    truth_zeta_diagonal_mean: float | None = None

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["mode_mapping"] = {str(k): v for k, v in self.mode_mapping.items()}
        data["policy_agreement"] = {str(k): v for k, v in self.policy_agreement.items()}
        return data


def check_user_sets(run_users: list[str], truth_users: list[str]) -> None:
    """Raise EvaluationError listing the difference when the two user sets disagree."""
    run_set, truth_set = set(run_users), set(truth_users)
    if run_set != truth_set:
        missing = [u for u in truth_users if u not in run_set]
        extra = [u for u in run_users if u not in truth_set]
        raise EvaluationError(missing, extra)


def contingency(
    predicted: tuple[ModeSequence, ...],
    truth: dict[str, np.ndarray],
    num_predicted: int,
    num_true: int,
) -> np.ndarray:
    """C[k, j] = number of steps decoded as mode k whose planted mode is j."""
    table = np.zeros((num_predicted, num_true), dtype=np.int64)
    for seq in predicted:
        planted = np.asarray(truth[seq.user_id])
        if planted.shape[0] != len(seq):
            raise ValueError(f"user {seq.user_id}: {len(seq)} decoded steps, {planted.shape[0]} planted")
        np.add.at(table, (seq.modes, planted), 1)
    return table


def match_modes(table: np.ndarray) -> dict[int, int]:
    """Relabeling of predicted modes onto planted ones maximising agreement (optimal assignment)."""
    rows, cols = linear_sum_assignment(table, maximize=True)
    return {int(k): int(j) for k, j in zip(rows, cols)}


def _greedy_from_policies(policies: pd.DataFrame, mode: int) -> dict[str, str]:
    rows = policies[policies["mode"] == mode]
    actions = [c for c in policies.columns if c not in ("mode", "state")]
    probs = rows[actions].to_numpy(dtype=float)
    return {state: actions[int(np.argmax(p))] for state, p in zip(rows["state"], probs)}


def policy_agreement(policies: pd.DataFrame, truth: GroundTruth, mapping: dict[int, int]) -> dict[int, float]:
    """Per matched run mode: share of states where its greedy action equals the planted mode's."""
    out: dict[int, float] = {}
    for run_mode, true_mode in mapping.items():
        if true_mode >= len(truth.greedy_actions):
            continue
        run_greedy = _greedy_from_policies(policies, run_mode)
        planted = truth.greedy_actions[true_mode]
        shared = [s for s in planted if s in run_greedy]
        if shared:
            out[run_mode] = sum(run_greedy[s] == planted[s] for s in shared) / len(shared)
    return out


def boundary_agreement(predicted: tuple[ModeSequence, ...], truth: dict[str, np.ndarray], mapping: dict[int, int]) -> float:
    """Share of users whose first and last decoded modes both map onto the planted first and last modes."""
    if not predicted:
        return 0.0
    hits = 0
    for seq in predicted:
        planted = truth[seq.user_id]
        first = mapping.get(int(seq.modes[0]), -1) == int(planted[0])
        last = mapping.get(int(seq.modes[-1]), -1) == int(planted[-1])
        hits += first and last
    return hits / len(predicted)


def evaluate_switched(
    predicted: tuple[ModeSequence, ...],
    truth: GroundTruth,
    policies: pd.DataFrame | None = None,
    zeta: np.ndarray | None = None,
) -> EvalReport:
    check_user_sets([s.user_id for s in predicted], list(truth.user_ids))
    num_true = truth.mode_thetas.shape[0] if truth.mode_thetas is not None else 1
    num_predicted = max(
        max((int(s.modes.max()) for s in predicted), default=-1) + 1,
        zeta.shape[0] if zeta is not None else 1,
    )
    table = contingency(predicted, truth.sequences, num_predicted, num_true)
    mapping = match_modes(table)
    total = int(table.sum())
    matched = sum(int(table[k, j]) for k, j in mapping.items())
    return EvalReport(
        kind=ScenarioMode.switched.value,
        num_users=len(predicted),
        accuracy=matched / total if total else 0.0,
        num_steps=total,
        mode_mapping=mapping,
        policy_agreement=policy_agreement(policies, truth, mapping) if policies is not None else {},
        boundary_agreement=boundary_agreement(predicted, truth.sequences, mapping),
        zeta_diagonal_mean=float(np.mean(np.diag(zeta))) if zeta is not None else None,
        truth_zeta_diagonal_mean=float(np.mean(np.diag(truth.zeta))) if truth.zeta is not None else None,
    )


def evaluate_static(predicted: dict[str, str], truth: GroundTruth) -> EvalReport:
    """Classification accuracy and a truth → prediction confusion table."""
    check_user_sets(list(predicted), list(truth.user_ids))
    classes = list(dict.fromkeys(list(truth.classes.values()) + list(predicted.values())))
    confusion = {c: {p: 0 for p in classes} for c in classes}
    correct = 0
    for user in truth.user_ids:
        true_cls, pred_cls = truth.classes[user], predicted[user]
        confusion[true_cls][pred_cls] += 1
        correct += true_cls == pred_cls
    return EvalReport(
        kind=ScenarioMode.static.value,
        num_users=len(truth.user_ids),
        accuracy=correct / len(truth.user_ids) if truth.user_ids else 0.0,
        confusion=confusion,
    )


def evaluate_run(run_dir: str | Path, truth_path: str | Path) -> EvalReport:
    """Read a run directory (never writing to it) and score it against the truth sidecar."""
    run = Path(run_dir)
    truth = load_truth(truth_path)
    if truth.mode == ScenarioMode.static:
        probs_path = run / "class_probs.csv"
        if not probs_path.exists():
            raise ValueError(f"{run} holds no class_probs.csv; static truth needs an sbc run")
        df = read_class_probs(probs_path)
        report = evaluate_static(dict(zip(df["user_id"], df["hard_label"])), truth)
    else:
        modes_path = run / "modes.jsonl"
        if not modes_path.exists():
            raise ValueError(f"{run} holds no modes.jsonl; switched truth needs a dbc run")
        policies = read_mode_policies(run / "mode_policies.csv") if (run / "mode_policies.csv").exists() else None
        zeta = read_zeta(run / "zeta.csv") if (run / "zeta.csv").exists() else None
        report = evaluate_switched(read_mode_sequences(modes_path), truth, policies, zeta)
    logger.info("Evaluated %s run over %d users: accuracy %.3f", report.kind, report.num_users, report.accuracy)
    return report
