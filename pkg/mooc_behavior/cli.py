"""Typer CLI for MOOC Behavior."""

from __future__ import annotations

import json
import logging
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from . import __version__
from .config import RunConfig, apply_overrides, load_config
from .errors import BehaviorError
from .evaluator import evaluate_run
from .exporters import (
    build_manifest,
    write_class_probs,
    write_event_log,
    write_manifest,
    write_mdp,
    write_mode_policies,
    write_mode_sequences,
    write_mode_thetas,
    write_thetas,
    write_timeline,
    write_timeline_svg,
    write_trajectories,
    write_zeta,
)
from .logging_config import setup_logging
from .models import FeatureKind, FeatureSpec, Mdp, StateActionVocab, TrajectoryDataset
from .mooc_model import build_mdp, build_vocab, run_sbc
from .parser import load_event_log, load_feature_spec, load_labels, load_vocab, save_feature_spec, save_vocab
from .smdp import run_dbc
from .synth import get_preset, load_scenario, save_scenario, save_truth, simulate

logger = logging.getLogger(__name__)

app = typer.Typer(
    name="mooc-behavior",
    help="MOOC Behavior: reward inference and behavior clustering from learner event logs",
    add_completion=False,
    invoke_without_command=True,
)
console = Console()
err_console = Console(stderr=True)


@dataclass
class GlobalOptions:
    config: Optional[Path]
    seed: Optional[int]
    out: Path
    threads: Optional[int]

    def run_config(self) -> RunConfig:
        return apply_overrides(load_config(self.config), seed=self.seed, threads=self.threads)


def version_callback(value: bool) -> None:
    if value:
        console.print(f"MOOC Behavior v{__version__}")
        raise typer.Exit()


@app.callback(invoke_without_command=True)
def main_callback(
    ctx: typer.Context,
    version: Optional[bool] = typer.Option(None, "--version", "-V", callback=version_callback, is_eager=True),
    config: Optional[Path] = typer.Option(None, "--config", help="Flat YAML config (or a run manifest to replay)"),
    seed: Optional[int] = typer.Option(None, "--seed", min=0, help="Global seed (overrides the config file)"),
    out: Path = typer.Option(Path("out"), "--out", help="Output directory"),
    threads: Optional[int] = typer.Option(None, "--threads", min=0, help="Worker threads (0 = all cores)"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
    log_file: Optional[Path] = typer.Option(None, "--log-file", help="Also log to a rotating file"),
) -> None:
    """MOOC Behavior: reward inference and behavior clustering from learner event logs."""
    setup_logging(logging.DEBUG if verbose else logging.INFO, log_file)
    ctx.obj = GlobalOptions(config=config, seed=seed, out=out, threads=threads)
    if ctx.invoked_subcommand is None:
        console.print(ctx.get_help())


@contextmanager
def _reported(command: str) -> Iterator[None]:
    """Turn pipeline errors into a red message plus one JSON line on stderr, exit code 1."""
    try:
        yield
    except (BehaviorError, ValueError, OSError) as e:
        err_console.print(f"[red]Error: {escape(str(e))}[/red]", highlight=False)
        typer.echo(json.dumps({"error": type(e).__name__, "message": str(e), "command": command}), err=True)
        raise typer.Exit(1) from None


def _out_dir(opts: GlobalOptions) -> Path:
    opts.out.mkdir(parents=True, exist_ok=True)
    return opts.out


def _manifest_config(cfg: RunConfig) -> dict:
    # Everything but threads; replays on other machines must match byte for byte.
    return {k: v for k, v in cfg.to_dict().items() if k != "threads"}


def _prepare(
    log_path: Path,
    features_path: Optional[Path],
    vocab_path: Optional[Path],
    cfg: RunConfig,
) -> tuple[StateActionVocab, FeatureSpec, Mdp, TrajectoryDataset]:
    log = load_event_log(log_path)
    vocab = load_vocab(vocab_path) if vocab_path else build_vocab(log)
    spec = load_feature_spec(features_path)
    mdp, data = build_mdp(log, vocab, spec, nu=cfg.nu, session_gap_ms=cfg.session_gap_ms)
    return vocab, spec, mdp, data


def _written(paths: list[Path]) -> None:
    for p in paths:
        console.print(f"[green]Written {p}[/green]")


# Common options
_log_opt = typer.Option(..., "--log", "-l", exists=True, dir_okay=False, help="Event log (JSON Lines or CSV)")
_features_opt = typer.Option(None, "--features", "-f", exists=True, dir_okay=False, help="Expert feature YAML")
_vocab_opt = typer.Option(None, "--vocab", exists=True, dir_okay=False, help="Vocabulary JSON (default: from log)")


@app.command("simulate")
def simulate_cmd(
    ctx: typer.Context,
    preset: Optional[str] = typer.Option(None, "--preset", "-p", help="Built-in scenario name"),
    scenario_file: Optional[Path] = typer.Option(
        None, "--scenario", exists=True, dir_okay=False, help="Scenario YAML (its own seed unless --seed is given)"
    ),
    users: Optional[int] = typer.Option(None, "--users", min=1, help="Override number of users"),
    steps: Optional[int] = typer.Option(None, "--steps", min=1, help="Override steps per user"),
) -> None:
    """Generate a synthetic event log and its ground-truth sidecar."""
    opts: GlobalOptions = ctx.obj
    with _reported("simulate"):
        if (preset is None) == (scenario_file is None):
            raise ValueError("Give exactly one of --preset or --scenario")
        cfg = opts.run_config()
        if preset:
            scenario = get_preset(preset).with_overrides(seed=cfg.seed)
        else:
            # A scenario file keeps its own seed unless --seed is given.
            scenario = load_scenario(scenario_file).with_overrides(seed=opts.seed)
            cfg = apply_overrides(cfg, seed=scenario.seed)
        scenario = scenario.with_overrides(num_users=users, steps_per_user=steps)
        data, truth = simulate(scenario, threads=cfg.effective_threads)

        out = _out_dir(opts)
        outputs = [out / "events.jsonl", out / "truth.json", out / "vocab.json", out / "scenario.yaml"]
        count = write_event_log(data, scenario.vocab, outputs[0])
        save_truth(truth, outputs[1])
        save_vocab(scenario.vocab, outputs[2])
        save_scenario(scenario, outputs[3])
        if scenario.features.kind == FeatureKind.expert:
            outputs.append(out / "features.yaml")
            save_feature_spec(scenario.features, outputs[-1])
        manifest = build_manifest(
            "simulate",
            _manifest_config(cfg),
            {"scenario": scenario_file},
            outputs,
            options={"preset": preset, "users": scenario.num_users, "steps": scenario.steps_per_user},
        )
        outputs.append(write_manifest(manifest, out))

    console.print(
        f"[bold]{scenario.name}[/bold] ({scenario.mode.value}): "
        f"{scenario.num_users} users × {scenario.steps_per_user} steps, {count} records"
    )
    _written(outputs)


@app.command("build-mdp")
def build_mdp_cmd(
    ctx: typer.Context,
    log_path: Path = _log_opt,
    features: Optional[Path] = _features_opt,
    vocab_path: Optional[Path] = _vocab_opt,
) -> None:
    """Ingest an event log into an empirical MDP and per-user trajectories."""
    opts: GlobalOptions = ctx.obj
    with _reported("build-mdp"):
        cfg = opts.run_config()
        vocab, _, mdp, data = _prepare(log_path, features, vocab_path, cfg)
        out = _out_dir(opts)
        outputs = [out / "vocab.json", out / "mdp.npz", out / "trajectories.jsonl"]
        save_vocab(vocab, outputs[0])
        write_mdp(mdp, outputs[1])
        write_trajectories(data, outputs[2])
        manifest = build_manifest(
            "build-mdp",
            _manifest_config(cfg),
            {"log": log_path, "features": features, "vocab": vocab_path},
            outputs,
        )
        outputs.append(write_manifest(manifest, out))

    table = Table(title="Empirical MDP")
    table.add_column("Item", style="cyan")
    table.add_column("Value", style="green")
    table.add_row("States", str(mdp.num_states))
    table.add_row("Actions", str(mdp.num_actions))
    table.add_row("Features", str(mdp.feature_dim))
    table.add_row("Users", str(len(data)))
    table.add_row("Steps", str(data.num_steps))
    console.print(table)
    _written(outputs)


@app.command("sbc")
def sbc_cmd(
    ctx: typer.Context,
    log_path: Path = _log_opt,
    labels_path: Path = typer.Option(..., "--labels", exists=True, dir_okay=False, help="CSV user_id,class_name"),
    features: Optional[Path] = _features_opt,
    vocab_path: Optional[Path] = _vocab_opt,
) -> None:
    """Static behavior clustering: per-user BIRL, then label propagation."""
    opts: GlobalOptions = ctx.obj
    with _reported("sbc"):
        cfg = opts.run_config()
        known = load_labels(labels_path)
        vocab, spec, mdp, data = _prepare(log_path, features, vocab_path, cfg)
        result = run_sbc(
            mdp,
            data,
            known,
            cfg.birl_config(mdp.feature_dim),
            lp_sigma=cfg.lp_sigma,
            lp_tol=cfg.lp_tol,
            lp_max_iter=cfg.lp_max_iter,
            threads=cfg.effective_threads,
        )

        out = _out_dir(opts)
        outputs = [out / "thetas.csv", out / "class_probs.csv"]
        users = list(result.user_ids)
        write_thetas(
            users,
            result.thetas,
            [result.posteriors[u].acceptance_rate for u in users],
            spec.dimension_names(vocab),
            outputs[0],
        )
        write_class_probs(users, result.labels.probs, list(result.class_names), result.hard_labels, outputs[1])
        manifest = build_manifest(
            "sbc",
            _manifest_config(cfg),
            {"log": log_path, "labels": labels_path, "features": features, "vocab": vocab_path},
            outputs,
            options={
                "classes": list(result.class_names),
                "labeled_users": len(result.labeled_users),
                "excluded_users": list(result.excluded),
                "lp_sigma_used": result.sigma,
                "lp_iterations": len(result.labels.delta_trace),
            },
        )
        outputs.append(write_manifest(manifest, out))

    table = Table(title="Class assignments")
    table.add_column("Class", style="cyan")
    table.add_column("Users", style="green", justify="right")
    for name in result.class_names:
        table.add_row(name, str(result.hard_labels.count(name)))
    console.print(table)
    if result.excluded:
        console.print(f"[yellow]Excluded labeled users without data: {', '.join(result.excluded)}[/yellow]")
    _written(outputs)


@app.command("dbc")
def dbc_cmd(
    ctx: typer.Context,
    log_path: Path = _log_opt,
    features: Optional[Path] = _features_opt,
    vocab_path: Optional[Path] = _vocab_opt,
    mode_names: Optional[str] = typer.Option(None, "--mode-names", help="Comma-separated plot labels for the modes"),
) -> None:
    """Dynamic behavior clustering: Gibbs sampling over a switched MDP."""
    opts: GlobalOptions = ctx.obj
    with _reported("dbc"):
        cfg = opts.run_config()
        vocab, spec, mdp, data = _prepare(log_path, features, vocab_path, cfg)
        result = run_dbc(mdp, data, cfg.dbc_config(mdp.feature_dim), threads=cfg.effective_threads)

        out = _out_dir(opts)
        outputs = [
            out / "modes.jsonl",
            out / "mode_thetas.csv",
            out / "zeta.csv",
            out / "mode_policies.csv",
            out / "timeline.csv",
            out / "timeline.svg",
        ]
        write_mode_sequences(result.sequences, outputs[0])
        write_mode_thetas(result.model.thetas, spec.dimension_names(vocab), outputs[1])
        write_zeta(result.model.zeta, outputs[2])
        write_mode_policies(result.policies, vocab, outputs[3])
        write_timeline(result.sequences, outputs[4])
        labels = tuple(n.strip() for n in mode_names.split(",")) if mode_names else ()
        write_timeline_svg(result.sequences[: cfg.plot_users], cfg.num_modes, outputs[5], labels)
        manifest = build_manifest(
            "dbc",
            _manifest_config(cfg),
            {"log": log_path, "features": features, "vocab": vocab_path},
            outputs,
            options={"mode_names": list(labels)},
        )
        outputs.append(write_manifest(manifest, out))

    table = Table(title="Behavior modes")
    table.add_column("Mode", style="cyan", justify="right")
    table.add_column("Steps", style="green", justify="right")
    table.add_column("ζ stay", justify="right")
    occupancy = [sum(int((s.modes == k).sum()) for s in result.sequences) for k in range(cfg.num_modes)]
    for k in range(cfg.num_modes):
        table.add_row(str(k), str(occupancy[k]), f"{result.model.zeta[k, k]:.3f}")
    console.print(table)
    _written(outputs)


@app.command("eval")
def eval_cmd(
    run_dir: Path = typer.Argument(..., exists=True, file_okay=False, help="Output directory of an sbc/dbc run"),
    truth_path: Path = typer.Option(..., "--truth", exists=True, dir_okay=False, help="Ground-truth sidecar JSON"),
    report_path: Optional[Path] = typer.Option(None, "--report", help="Write the JSON report here"),
) -> None:
    """Score a run directory against planted ground truth (read-only)."""
    with _reported("eval"):
        report = evaluate_run(run_dir, truth_path)
        if report_path is not None:
            report_path.parent.mkdir(parents=True, exist_ok=True)
            report_path.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")

    table = Table(title=f"Evaluation ({report.kind})")
    table.add_column("Metric", style="cyan")
    table.add_column("Value", style="green", justify="right")
    table.add_row("Users", str(report.num_users))
    table.add_row("Accuracy", f"{report.accuracy:.3f}")
    if report.boundary_agreement is not None:
        table.add_row("First/last segment agreement", f"{report.boundary_agreement:.3f}")
    for mode, agreement in report.policy_agreement.items():
        table.add_row(f"Policy agreement, mode {mode}", f"{agreement:.3f}")
    if report.zeta_diagonal_mean is not None and report.truth_zeta_diagonal_mean is not None:
        table.add_row(
            "Mean ζ diagonal (run / truth)",
            f"{report.zeta_diagonal_mean:.3f} / {report.truth_zeta_diagonal_mean:.3f}",
        )
    console.print(table)
    if report_path is not None:
        _written([report_path])


def main() -> None:
    app()
