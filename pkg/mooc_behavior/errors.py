"""Exception hierarchy for MOOC Behavior."""

from __future__ import annotations


class BehaviorError(Exception):
    """Base class for every error the pipeline raises on purpose."""


class ConvergenceError(BehaviorError):
    """An iterative solver hit its iteration cap before reaching tolerance."""

    def __init__(self, what: str, residual: float, iterations: int) -> None:
        super().__init__(f"{what} did not converge after {iterations} iterations (last residual {residual:.3e})")
        self.residual = residual
        self.iterations = iterations


class IngestionError(BehaviorError):
    """An event-log record cannot be mapped onto the vocabulary."""

    def __init__(self, message: str, record: object = None) -> None:
        super().__init__(message if record is None else f"{message}: {record!r}")
        self.record = record


class ConfigError(BehaviorError):
    """Invalid or unknown configuration value."""


class LabelError(BehaviorError):
    """Label file does not cover the requested classes."""


class ScenarioError(BehaviorError):
    """Unknown preset or malformed scenario file."""


class EvaluationError(BehaviorError):
    """Predictions and planted truth do not describe the same users."""

    def __init__(self, missing: list[str], extra: list[str]) -> None:
        parts = []
        if missing:
            parts.append(f"missing from run: {', '.join(missing[:10])}" + (" ..." if len(missing) > 10 else ""))
        if extra:
            parts.append(f"not in truth: {', '.join(extra[:10])}" + (" ..." if len(extra) > 10 else ""))
        super().__init__("User sets differ (" + "; ".join(parts) + ")")
        self.missing = missing
        self.extra = extra
