"""Label propagation over reward-parameter vectors."""

from __future__ import annotations

import logging

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .errors import ConvergenceError
from .models import LabeledSet, LabelMatrix

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10_000


def default_sigma(points: np.ndarray) -> float:
    """Median pairwise Euclidean distance; 1.0 when all points coincide."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] < 2:
        return 1.0
    sigma = float(np.median(pdist(points, "euclidean")))
    return sigma if sigma > 0 else 1.0


def transition_matrix(points: np.ndarray, sigma: float) -> np.ndarray:
    """T_ij = w_ij / Σ_k w_kj with w_ij = exp(−‖x_i − x_j‖² / σ²), self-weights included."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    if points.shape[0] < 2:
        raise ValueError("transition matrix needs at least two points")
    weights = np.exp(-cdist(points, points, "sqeuclidean") / sigma**2)
    return weights / weights.sum(axis=0, keepdims=True)


def _row_normalize(y: np.ndarray) -> np.ndarray:
    sums = y.sum(axis=1, keepdims=True)
    uniform = np.full_like(y, 1.0 / y.shape[1])
    return np.where(sums > 0, y / np.where(sums > 0, sums, 1.0), uniform)


def label_prop(
    labeled: LabeledSet,
    sigma: float | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> LabelMatrix:
    """Iterate Y ← TY, row-normalise, clamp labeled rows; stop when max |ΔY| ≤ tol.

    ``sigma`` defaults to the median pairwise distance of the points.
    Raises ConvergenceError with the last delta after ``max_iter`` iterations.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    y0 = labeled.one_hot()
    mask = labeled.labeled_mask()
    if mask.all():
        return LabelMatrix(y0, delta_trace=(0.0,))

    sigma = default_sigma(labeled.points) if sigma is None else sigma
    t = transition_matrix(labeled.points, sigma)
    clamp = y0[mask]

    y = y0
    deltas: list[float] = []
    for _ in range(max_iter):
        y_next = _row_normalize(t @ y)
        y_next[mask] = clamp
        delta = float(np.max(np.abs(y_next - y)))
        deltas.append(delta)
        y = y_next
        if delta <= tol:
            logger.debug("Label propagation converged in %d iterations", len(deltas))
            return LabelMatrix(y, delta_trace=tuple(deltas))
    raise ConvergenceError("label propagation", deltas[-1], max_iter)


def hard_assignments(labels: LabelMatrix) -> np.ndarray:
    """Argmax class per row; ties go to the lowest class index."""
    return labels.hard_labels()
