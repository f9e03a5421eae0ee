"""Export modules for MOOC Behavior."""

from .csv_writer import (
    read_class_probs,
    read_mode_policies,
    read_thetas,
    read_timeline,
    read_zeta,
    write_class_probs,
    write_mode_policies,
    write_mode_thetas,
    write_thetas,
    write_timeline,
    write_zeta,
)
from .jsonl_writer import read_mode_sequences, write_event_log, write_mode_sequences, write_trajectories
from .manifest import build_manifest, file_digest, read_manifest, write_manifest
from .mdp_writer import read_mdp, write_mdp
from .plot_writer import write_timeline_svg

__all__ = [
    "build_manifest",
    "file_digest",
    "read_class_probs",
    "read_manifest",
    "read_mdp",
    "read_mode_policies",
    "read_mode_sequences",
    "read_thetas",
    "read_timeline",
    "read_zeta",
    "write_class_probs",
    "write_event_log",
    "write_manifest",
    "write_mdp",
    "write_mode_policies",
    "write_mode_sequences",
    "write_mode_thetas",
    "write_thetas",
    "write_timeline",
    "write_timeline_svg",
    "write_trajectories",
    "write_zeta",
]
