"""Invariant measures and irreducibility."""

from __future__ import annotations

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from fdtlab.app.config import constants
from fdtlab.app.infra.errors import MarkovError, Reducible, ValidationError
from fdtlab.app.infra.logger import get_logger
from .types import Generator, Measure, Vector, matrix_of, values_of

logger = get_logger(__name__)


def strong_components(L: "Generator | np.ndarray") -> int:
    """Number of strongly connected components of the jump graph."""
    M = matrix_of(L)
    adjacency = (M > 0).astype(np.int8)
    np.fill_diagonal(adjacency, 0)
    count, _ = connected_components(csr_matrix(adjacency), directed=True, connection="strong")
    return int(count)


def is_irreducible(L: "Generator | np.ndarray") -> bool:
    return strong_components(L) == 1


def invariance_residual(L: "Generator | np.ndarray", weights: Vector) -> float:
    """‖wᵀL‖_∞ / Σw, the balance defect of w measured as a probability."""
    w = values_of(weights)
    return float(np.max(np.abs(w @ matrix_of(L)))) / float(np.sum(w))


def invariant_measure(L: Generator) -> Measure:
    """Unique invariant probability measure of an irreducible generator.

    Solves μᵀL = 0 with Σμ = 1 by dense LU on Lᵀ with the last equation
    replaced by the normalization, followed by one refinement step.

    Raises:
        Reducible: the jump graph is not strongly connected
    """
    components = strong_components(L)
    if components != 1:
        raise Reducible(components)
    n = L.n
    system = np.array(L.rates.T, copy=True)
    system[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    factors = lu_factor(system)
    mu = lu_solve(factors, rhs)
    mu = mu + lu_solve(factors, rhs - system @ mu)
    if np.any(mu <= 0):
        # irreducible chains have a strictly positive solution; tiny negatives are round-off
        floor = np.max(np.abs(mu)) * 1e-13
        if np.min(mu) < -floor:
            raise MarkovError(
                "invariant measure solve produced negative weights",
                code="ILL_CONDITIONED",
                details={"min_weight": float(np.min(mu))},
            )
        mu = np.maximum(mu, np.finfo(float).tiny)
    mu = mu / mu.sum()
    residual = invariance_residual(L, mu)
    logger.debug(
        "invariant measure",
        extra={"extra_fields": {"n": n, "residual": residual}},
    )
    try:
        return Measure(L.space, mu, normalized=True)
    except ValidationError as exc:
        raise MarkovError("invariant measure is not strictly positive") from exc


def check_invariant(
    L: Generator, mu: Vector, tol: float = constants.INVARIANT_TOL
) -> tuple[bool, float]:
    residual = invariance_residual(L, mu)
    return residual <= tol, residual
