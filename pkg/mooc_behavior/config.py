"""Run configuration: defaults, YAML loading and validation."""

from __future__ import annotations

import dataclasses
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from .errors import ConfigError
from .models import Estimator

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BirlConfig:
    """Hyperparameters of one BIRL chain."""

    prior_lo: np.ndarray
    prior_hi: np.ndarray
    eta: float = 5.0
    proposal_sigma: float = 0.1
    n_samples: int = 5000
    burn_in: int = 1000
    seed: int = 0
    estimator: Estimator = Estimator.median
    vi_tol: float = 1e-9
    vi_max_iter: int = 10_000

    def __post_init__(self) -> None:
        lo = np.atleast_1d(np.asarray(self.prior_lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.prior_hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("prior_lo and prior_hi must be vectors of equal length")
        if not np.all(lo < hi):
            raise ValueError("prior_lo must be strictly below prior_hi componentwise")
        if self.eta < 0:
            raise ValueError("eta must be >= 0")
        if self.proposal_sigma < 0:
            raise ValueError("proposal_sigma must be >= 0")
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        if not 0 <= self.burn_in < self.n_samples:
            raise ValueError("burn_in must satisfy 0 <= burn_in < n_samples")
        object.__setattr__(self, "prior_lo", lo)
        object.__setattr__(self, "prior_hi", hi)
        object.__setattr__(self, "estimator", Estimator(self.estimator))

    @property
    def dim(self) -> int:
        return int(self.prior_lo.shape[0])

    def box_center(self) -> np.ndarray:
        return 0.5 * (self.prior_lo + self.prior_hi)

    def in_box(self, theta: np.ndarray) -> bool:
        return bool(np.all(theta >= self.prior_lo) and np.all(theta <= self.prior_hi))


@dataclass(frozen=True, eq=False)
class DbcConfig:
    """Hyperparameters of the switched-MDP Gibbs sampler."""

    num_modes: int
    prior_lo: np.ndarray
    prior_hi: np.ndarray
    alpha: float = 1.0
    eta: float = 5.0
    proposal_sigma: float = 0.1
    inner_mh_steps: int = 10
    n_sweeps: int = 500
    burn_in: int = 100
    seed: int = 0
    vi_tol: float = 1e-9
    vi_max_iter: int = 10_000

    def __post_init__(self) -> None:
        if self.num_modes < 1:
            raise ValueError("num_modes must be >= 1")
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if self.inner_mh_steps < 1:
            raise ValueError("inner_mh_steps must be >= 1")
        if not 0 <= self.burn_in < self.n_sweeps:
            raise ValueError("burn_in must satisfy 0 <= burn_in < n_sweeps")
        # Reuse BirlConfig validation for the shared fields.
        box = self.theta_config(seed=self.seed)
        object.__setattr__(self, "prior_lo", box.prior_lo)
        object.__setattr__(self, "prior_hi", box.prior_hi)

    def theta_config(self, seed: int) -> BirlConfig:
        """Per-mode θ-sampler settings; n_samples is the inner step count."""
        return BirlConfig(
            prior_lo=self.prior_lo,
            prior_hi=self.prior_hi,
            eta=self.eta,
            proposal_sigma=self.proposal_sigma,
            n_samples=self.inner_mh_steps,
            burn_in=0,
            seed=seed,
            vi_tol=self.vi_tol,
            vi_max_iter=self.vi_max_iter,
        )


@dataclass
class RunConfig:
    """Every hyperparameter of a CLI run, with documented defaults."""

    # MDP
    nu: float = 0.9
    session_gap_ms: int = 30 * 60 * 1000
    vi_tol: float = 1e-9
    vi_max_iter: int = 10_000
    # BIRL
    eta: float = 5.0
    proposal_sigma: float = 0.1
    prior_lo: float = -1.0
    prior_hi: float = 1.0
    n_samples: int = 5000
    burn_in: int = 1000
    estimator: str = "median"
    # Label propagation
    lp_sigma: Optional[float] = None
    lp_tol: float = 1e-8
    lp_max_iter: int = 10_000
    # DBC
    num_modes: int = 3
    alpha: float = 1.0
    inner_mh_steps: int = 10
    n_sweeps: int = 500
    dbc_burn_in: int = 100
    # Run
    seed: int = 0
    threads: int = 0
    plot_users: int = 3

    def validate(self) -> None:
        """Raise ConfigError on the first constraint violation."""
        checks: list[tuple[bool, str]] = [
            (0.0 < self.nu < 1.0, "nu must lie in (0, 1)"),
            (self.session_gap_ms > 0, "session_gap_ms must be positive"),
            (self.vi_tol > 0, "vi_tol must be > 0"),
            (self.vi_max_iter >= 1, "vi_max_iter must be >= 1"),
            (self.eta >= 0, "eta must be >= 0"),
            (self.proposal_sigma >= 0, "proposal_sigma must be >= 0"),
            (self.prior_lo < self.prior_hi, "prior_lo must be below prior_hi"),
            (self.n_samples >= 1, "n_samples must be >= 1"),
            (0 <= self.burn_in < self.n_samples, "burn_in must satisfy 0 <= burn_in < n_samples"),
            (self.estimator in {e.value for e in Estimator}, "estimator must be 'mean' or 'median'"),
            (self.lp_sigma is None or self.lp_sigma > 0, "lp_sigma must be > 0 (or null for the median rule)"),
            (self.lp_tol > 0, "lp_tol must be > 0"),
            (self.lp_max_iter >= 1, "lp_max_iter must be >= 1"),
            (self.num_modes >= 1, "num_modes (L) must be >= 1"),
            (self.alpha > 0, "alpha must be > 0"),
            (self.inner_mh_steps >= 1, "inner_mh_steps must be >= 1"),
            (self.n_sweeps >= 1, "n_sweeps must be >= 1"),
            (0 <= self.dbc_burn_in < self.n_sweeps, "dbc_burn_in must satisfy 0 <= dbc_burn_in < n_sweeps"),
            (self.seed >= 0, "seed must be a non-negative 64-bit integer"),
            (self.threads >= 0, "threads must be >= 0 (0 = available parallelism)"),
            (self.plot_users >= 0, "plot_users must be >= 0"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)

    @property
    def effective_threads(self) -> int:
        return self.threads or (os.cpu_count() or 1)

    def birl_config(self, dim: int, seed: int | None = None) -> BirlConfig:
        return BirlConfig(
            prior_lo=np.full(dim, self.prior_lo),
            prior_hi=np.full(dim, self.prior_hi),
            eta=self.eta,
            proposal_sigma=self.proposal_sigma,
            n_samples=self.n_samples,
            burn_in=self.burn_in,
            seed=self.seed if seed is None else seed,
            estimator=Estimator(self.estimator),
            vi_tol=self.vi_tol,
            vi_max_iter=self.vi_max_iter,
        )

    def dbc_config(self, dim: int) -> DbcConfig:
        return DbcConfig(
            num_modes=self.num_modes,
            prior_lo=np.full(dim, self.prior_lo),
            prior_hi=np.full(dim, self.prior_hi),
            alpha=self.alpha,
            eta=self.eta,
            proposal_sigma=self.proposal_sigma,
            inner_mh_steps=self.inner_mh_steps,
            n_sweeps=self.n_sweeps,
            burn_in=self.dbc_burn_in,
            seed=self.seed,
            vi_tol=self.vi_tol,
            vi_max_iter=self.vi_max_iter,
        )

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


_FIELD_TYPES: dict[str, type] = {
    f.name: (float if f.name == "lp_sigma" else type(f.default))
    for f in dataclasses.fields(RunConfig)
}


def _coerce(key: str, value: Any) -> Any:
    expected = _FIELD_TYPES[key]
    if value is None:
        if key == "lp_sigma":
            return None
        raise ConfigError(f"{key} cannot be null")
    try:
        if expected is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError(value)
            return int(value)
        if expected is float:
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot interpret {value!r} as {expected.__name__}") from None


def config_from_mapping(data: dict[str, Any]) -> RunConfig:
    """Build and validate a RunConfig from a flat mapping. Unknown keys are errors."""
    unknown = sorted(set(data) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")
    values = {key: _coerce(key, value) for key, value in data.items()}
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def load_config(path: str | Path | None) -> RunConfig:
    """Load a flat YAML config file; a run manifest is accepted too (its ``config`` block is used)."""
    if path is None:
        cfg = RunConfig()
        cfg.validate()
        return cfg

    p = Path(path)
    if not p.exists():
        raise ConfigError(f"Config file not found: {p}")
    with open(p, encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Config file {p} is not valid YAML: {e}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {p} must contain key: value pairs")
    if isinstance(data.get("config"), dict):
        logger.info("Reading run configuration from manifest %s", p)
        data = data["config"]
    return config_from_mapping(data)


def apply_overrides(cfg: RunConfig, **overrides: Any) -> RunConfig:
    """Return a copy with the non-None overrides applied, re-validated."""
    data = cfg.to_dict()
    data.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_mapping(data)
