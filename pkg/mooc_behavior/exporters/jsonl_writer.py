"""JSON Lines export: synthetic event logs, trajectories and decoded mode sequences."""

from __future__ import annotations

import json
from pathlib import Path

from ..models import ModeSequence, StateActionVocab, TrajectoryDataset

BASE_TS_MS = 1_700_000_000_000
STEP_MS = 10_000


def write_event_log(data: TrajectoryDataset, vocab: StateActionVocab, path: str | Path) -> int:
    """Write trajectories as raw event records, user by user, one step every ``STEP_MS``.

    Resting steps are written as explicit records on the resting page, so the
    spacing never opens a session gap. Returns the number of records.
    """
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for traj in data:
            for t, (s, a) in enumerate(traj.steps):
                rec = {
                    "user": traj.user_id,
                    "ts": BASE_TS_MS + t * STEP_MS,
                    "page": vocab.state_names[s],
                    "action": vocab.action_names[a],
                }
                f.write(json.dumps(rec, ensure_ascii=False) + "\n")
                count += 1
    return count


def write_trajectories(data: TrajectoryDataset, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for traj in data:
            rec = {"user": traj.user_id, "states": traj.states.tolist(), "actions": traj.actions.tolist()}
            f.write(json.dumps(rec) + "\n")


def write_mode_sequences(sequences: tuple[ModeSequence, ...], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for seq in sequences:
            rec = {"user": seq.user_id, "modes": seq.modes.tolist(), "posterior_max": seq.posterior_max.tolist()}
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")


def read_mode_sequences(path: str | Path) -> tuple[ModeSequence, ...]:
    sequences: list[ModeSequence] = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                raw = json.loads(line)
                sequences.append(ModeSequence(raw["user"], raw["modes"], raw.get("posterior_max", [])))
    return tuple(sequences)
