"""Expectations, norms and distances used in residual reports."""

from __future__ import annotations

import numpy as np

from .types import Vector, values_of


def expectation(weights: Vector, values: Vector) -> float:
    """⟨g⟩_ν as a plain weighted sum (ν is used as given, not renormalized)."""
    return float(np.dot(values_of(weights), values_of(values)))


def sup_norm(values: Vector) -> float:
    v = values_of(values)
    return float(np.max(np.abs(v))) if v.size else 0.0


def l2_norm(values: Vector, weights: Vector) -> float:
    """‖g‖ in L₂(μ) with μ scaled to a probability."""
    w = values_of(weights)
    v = values_of(values)
    return float(np.sqrt(np.dot(w, v * v) / np.sum(w)))


def operator_sup_norm(matrix: np.ndarray) -> float:
    """Induced sup-norm: max absolute row sum."""
    return float(np.max(np.abs(np.asarray(matrix)).sum(axis=1)))


def total_variation(p: Vector, q: Vector) -> float:
    """½Σ|p − q| after scaling both to probabilities."""
    pv, qv = values_of(p), values_of(q)
    return 0.5 * float(np.sum(np.abs(pv / pv.sum() - qv / qv.sum())))


def norm_pair(values: Vector, weights: Vector) -> dict[str, float]:
    """Both norms, as reported next to every semigroup residual."""
    return {"sup": sup_norm(values), "l2": l2_norm(values, weights)}
