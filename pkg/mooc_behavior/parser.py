"""Readers for event logs (JSON Lines / CSV), label files, vocabularies and expert feature files."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from .errors import IngestionError, LabelError
from .models import EventLog, EventRecord, FeatureKind, FeatureSpec, StateActionVocab, Trajectory, TrajectoryDataset

logger = logging.getLogger(__name__)

EVENT_FIELDS = ("user", "ts", "page", "action")
LABEL_FIELDS = ("user_id", "class_name")


def _make_record(raw: dict, where: str) -> EventRecord | None:
    try:
        ts = raw["ts"]
        if isinstance(ts, bool) or (isinstance(ts, float) and not float(ts).is_integer()):
            raise ValueError(f"timestamp must be an integer, got {ts!r}")
        return EventRecord(user=str(raw["user"]), ts=int(ts), page=str(raw["page"]), action=str(raw["action"]))
    except (KeyError, TypeError, ValueError) as e:
        logger.warning("Skipping malformed event record (%s): %s", where, e)
        return None


def parse_events_jsonl(path: str | Path) -> list[EventRecord]:
    """Parse one JSON object per line: {"user", "ts", "page", "action"}. Blank lines are ignored."""
    records: list[EventRecord] = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as e:
                logger.warning("Skipping malformed JSON on line %d: %s", lineno, e)
                continue
            if not isinstance(raw, dict):
                logger.warning("Skipping non-object JSON on line %d", lineno)
                continue
            rec = _make_record(raw, f"line {lineno}")
            if rec is not None:
                records.append(rec)
    return records


def parse_events_csv(path: str | Path) -> list[EventRecord]:
    """Parse a CSV with header row user,ts,page,action."""
    df = pd.read_csv(path, dtype={"user": str, "page": str, "action": str}, keep_default_na=False)
    missing = [c for c in EVENT_FIELDS if c not in df.columns]
    if missing:
        raise IngestionError(f"Event CSV {path} lacks columns: {', '.join(missing)}")
    records: list[EventRecord] = []
    for row_no, row in enumerate(df[list(EVENT_FIELDS)].itertuples(index=False), start=2):
        raw = {"user": row.user, "ts": row.ts, "page": row.page, "action": row.action}
        if isinstance(raw["ts"], np.integer):
            raw["ts"] = int(raw["ts"])
        elif isinstance(raw["ts"], np.floating):
            raw["ts"] = float(raw["ts"])
        rec = _make_record(raw, f"row {row_no}")
        if rec is not None:
            records.append(rec)
    return records


def load_event_log(path: str | Path) -> EventLog:
    """Auto-detect format by suffix (.csv → CSV, anything else → JSON Lines) and load."""
    p = Path(path)
    if not p.exists():
        raise IngestionError(f"Event log not found: {p}")
    records = parse_events_csv(p) if p.suffix.lower() == ".csv" else parse_events_jsonl(p)
    if not records:
        raise IngestionError(f"Event log {p} contains no valid records")
    logger.info("Loaded %d event records from %s", len(records), p)
    return EventLog(tuple(records))


def load_labels(path: str | Path) -> dict[str, str]:
    """Read known user classes from a CSV with header user_id,class_name (first label wins on duplicates)."""
    p = Path(path)
    if not p.exists():
        raise LabelError(f"Label file not found: {p}")
    df = pd.read_csv(p, dtype=str, keep_default_na=False)
    missing = [c for c in LABEL_FIELDS if c not in df.columns]
    if missing:
        raise LabelError(f"Label file {p} lacks columns: {', '.join(missing)}")

    labels: dict[str, str] = {}
    for user, cls in df[list(LABEL_FIELDS)].itertuples(index=False):
        user, cls = user.strip(), cls.strip()
        if not user or not cls:
            logger.warning("Skipping incomplete label row: %r, %r", user, cls)
            continue
        if user in labels:
            if labels[user] != cls:
                logger.warning("Duplicate label for user %s (%s vs %s), keeping first", user, labels[user], cls)
            continue
        labels[user] = cls
    return labels


def load_vocab(path: str | Path) -> StateActionVocab:
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    try:
        return StateActionVocab(state_names=tuple(data["state_names"]), action_names=tuple(data["action_names"]))
    except (KeyError, TypeError) as e:
        raise IngestionError(f"Vocabulary file {path} is malformed: {e}") from None


def save_vocab(vocab: StateActionVocab, path: str | Path) -> None:
    data = {"state_names": list(vocab.state_names), "action_names": list(vocab.action_names)}
    Path(path).write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def load_feature_spec(path: str | Path | None) -> FeatureSpec:
    """Expert features from YAML ``{names: [...], features: {state: {action: [...]}}}``; None → indicator."""
    if path is None:
        return FeatureSpec(kind=FeatureKind.indicator)
    with open(path, encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    try:
        table = {
            str(state): {str(action): tuple(float(v) for v in vec) for action, vec in row.items()}
            for state, row in data["features"].items()
        }
        return FeatureSpec(kind=FeatureKind.expert, names=tuple(data["names"]), table=table)
    except (KeyError, TypeError, AttributeError) as e:
        raise IngestionError(f"Feature file {path} is malformed: {e}") from None


def save_feature_spec(spec: FeatureSpec, path: str | Path) -> None:
    data = {
        "names": list(spec.names),
        "features": {state: {action: list(vec) for action, vec in row.items()} for state, row in spec.table.items()},
    }
    Path(path).write_text(
        yaml.dump(data, default_flow_style=None, allow_unicode=True, sort_keys=False),
        encoding="utf-8",
    )


def load_trajectories(path: str | Path) -> TrajectoryDataset:
    """Read trajectories written by ``build-mdp`` (one JSON object per trajectory)."""
    trajectories: list[Trajectory] = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                raw = json.loads(line)
                trajectories.append(Trajectory(raw["user"], raw["states"], raw["actions"]))
    return TrajectoryDataset(tuple(trajectories))
