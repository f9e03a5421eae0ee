"""Run manifests: command, effective config, library versions and file digests."""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import scipy
import yaml

from .. import __version__

MANIFEST_NAME = "manifest.yaml"


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def library_versions() -> dict[str, str]:
    return {
        "mooc_behavior": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
    }


def build_manifest(
    command: str,
    config: dict[str, Any],
    inputs: dict[str, str | Path | None],
    outputs: list[Path],
    options: dict[str, Any] | None = None,
) -> dict[str, Any]:
    """Everything needed to replay a run; no wall-clock fields."""
    return {
        "command": command,
        "versions": library_versions(),
        "config": dict(config),
        "options": dict(options or {}),
        "inputs": {
            name: {"path": str(p), "sha256": file_digest(p)} for name, p in inputs.items() if p is not None
        },
        "outputs": {p.name: file_digest(p) for p in outputs},
    }


def write_manifest(manifest: dict[str, Any], out_dir: str | Path) -> Path:
    path = Path(out_dir) / MANIFEST_NAME
    path.write_text(yaml.safe_dump(manifest, sort_keys=False, allow_unicode=True), encoding="utf-8")
    return path


def read_manifest(run_dir: str | Path) -> dict[str, Any]:
    path = Path(run_dir) / MANIFEST_NAME
    with open(path, encoding="utf-8") as f:
        return yaml.safe_load(f) or {}
