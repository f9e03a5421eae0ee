"""CSV export for per-user thetas, class probabilities, mode parameters and timelines."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd

from ..models import ModeSequence, StateActionVocab


def _write(df: pd.DataFrame, path: str | Path) -> None:
    df.to_csv(path, index=False, lineterminator="\n")


def write_thetas(
    user_ids: list[str],
    thetas: np.ndarray,
    acceptance: list[float],
    dimension_names: list[str],
    path: str | Path,
) -> None:
    """user_id, one column per θ component, acceptance_rate."""
    df = pd.DataFrame(np.asarray(thetas, dtype=float), columns=dimension_names)
    df.insert(0, "user_id", user_ids)
    df["acceptance_rate"] = acceptance
    _write(df, path)


def write_class_probs(
    user_ids: list[str],
    probs: np.ndarray,
    class_names: list[str],
    hard_labels: list[str],
    path: str | Path,
) -> None:
    """user_id, one column per class, hard_label."""
    df = pd.DataFrame(np.asarray(probs, dtype=float), columns=class_names)
    df.insert(0, "user_id", user_ids)
    df["hard_label"] = hard_labels
    _write(df, path)


def read_class_probs(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path, dtype={"user_id": str, "hard_label": str}, keep_default_na=False)


def read_thetas(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path, dtype={"user_id": str})


def write_mode_thetas(thetas: np.ndarray, dimension_names: list[str], path: str | Path) -> None:
    df = pd.DataFrame(np.asarray(thetas, dtype=float), columns=dimension_names)
    df.insert(0, "mode", np.arange(df.shape[0]))
    _write(df, path)


def write_zeta(zeta: np.ndarray, path: str | Path) -> None:
    """Square table: row ``from_mode``, one column per destination mode."""
    zeta = np.asarray(zeta, dtype=float)
    df = pd.DataFrame(zeta, columns=[str(j) for j in range(zeta.shape[1])])
    df.insert(0, "from_mode", np.arange(zeta.shape[0]))
    _write(df, path)


def read_zeta(path: str | Path) -> np.ndarray:
    return pd.read_csv(path).drop(columns="from_mode").to_numpy(dtype=float)


def write_mode_policies(policies: np.ndarray, vocab: StateActionVocab, path: str | Path) -> None:
    """Long format: mode, state, then π(s, a) per action name."""
    policies = np.asarray(policies, dtype=float)
    num_modes, n_s, _ = policies.shape
    df = pd.DataFrame(policies.reshape(num_modes * n_s, -1), columns=list(vocab.action_names))
    df.insert(0, "state", list(vocab.state_names) * num_modes)
    df.insert(0, "mode", np.repeat(np.arange(num_modes), n_s))
    _write(df, path)


def read_mode_policies(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path, dtype={"state": str}, keep_default_na=False)


def timeline_frame(sequences: tuple[ModeSequence, ...]) -> pd.DataFrame:
    """One row per (user, step): the plot data behind the timeline figure."""
    frames = [
        pd.DataFrame(
            {
                "user_id": seq.user_id,
                "step": np.arange(len(seq)),
                "mode": seq.modes,
                "posterior_max": seq.posterior_max,
            }
        )
        for seq in sequences
    ]
    if not frames:
        return pd.DataFrame(columns=["user_id", "step", "mode", "posterior_max"])
    return pd.concat(frames, ignore_index=True)


def write_timeline(sequences: tuple[ModeSequence, ...], path: str | Path) -> None:
    _write(timeline_frame(sequences), path)


def read_timeline(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path, dtype={"user_id": str})
