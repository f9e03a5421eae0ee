"""Vector timeline plots of decoded behavior modes (one panel per user)."""

from __future__ import annotations

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

from matplotlib.figure import Figure  # noqa: E402

from ..models import ModeSequence  # noqa: E402

logger = logging.getLogger(__name__)

SVG_SALT = "mooc-behavior"


def write_timeline_svg(
    sequences: tuple[ModeSequence, ...],
    num_modes: int,
    path: str | Path,
    mode_names: tuple[str, ...] = (),
) -> None:
    """Step index against mode index for each sequence given. Output bytes depend only on the inputs."""
    labels = list(mode_names) if len(mode_names) == num_modes else [f"mode {k}" for k in range(num_modes)]
    panels = max(1, len(sequences))
    fig = Figure(figsize=(8.0, 1.6 * panels + 0.6))
    axes = fig.subplots(panels, 1, squeeze=False, sharex=False)[:, 0]

    for ax, seq in zip(axes, sequences):
        ax.step(range(len(seq)), seq.modes, where="post", color="tab:blue", linewidth=1.2)
        ax.set_yticks(range(num_modes))
        ax.set_yticklabels(labels)
        ax.set_ylim(-0.5, num_modes - 0.5)
        ax.set_xlim(0, max(1, len(seq) - 1))
        ax.set_title(seq.user_id, fontsize=9, loc="left")
        ax.grid(axis="y", alpha=0.3)
    axes[-1].set_xlabel("step")
    fig.tight_layout()

    with matplotlib.rc_context({"svg.hashsalt": SVG_SALT, "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    logger.info("Timeline plot for %d user(s) written to %s", len(sequences), path)
