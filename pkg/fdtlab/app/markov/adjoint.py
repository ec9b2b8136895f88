"""Time reversal, symmetrization and detailed balance."""

from __future__ import annotations

import numpy as np

from fdtlab.app.config import constants
from fdtlab.app.infra.errors import NotInvariant
from fdtlab.app.infra.logger import get_logger
from .invariant import invariance_residual
from .types import Generator, Measure, Vector, matrix_of, refill_diagonal, values_of

logger = get_logger(__name__)


def adjoint_matrix(L: "Generator | np.ndarray", mu: Vector) -> np.ndarray:
    """c*(x,y) = μ(y)c(y,x)/μ(x) with the diagonal refilled; no invariance check."""
    w = values_of(mu)
    M = matrix_of(L)
    return refill_diagonal((M.T * w[None, :]) / w[:, None])


def _require_invariant(L: Generator, mu0: Measure, tol: float) -> None:
    residual = invariance_residual(L, mu0)
    if residual > tol:
        raise NotInvariant(residual, tol)


def adjoint(
    L: Generator, mu0: Measure, tol: float = constants.ADJOINT_INVARIANCE_TOL
) -> Generator:
    """Time-reversed generator L* with respect to an invariant μ⁰.

    Raises:
        NotInvariant: μ⁰ fails the balance check
    """
    _require_invariant(L, mu0, tol)
    return Generator(L.space, adjoint_matrix(L, mu0))


def symmetrize(
    L: Generator, mu0: Measure, tol: float = constants.ADJOINT_INVARIANCE_TOL
) -> Generator:
    """L̃ = ½(L + L*), which is μ⁰-symmetric."""
    _require_invariant(L, mu0, tol)
    return Generator(L.space, refill_diagonal(0.5 * (L.rates + adjoint_matrix(L, mu0))))


def reversibility_residual(L: "Generator | np.ndarray", mu: Vector) -> float:
    """max |μ(x)c(x,y) − μ(y)c(y,x)| with μ scaled to a probability."""
    w = values_of(mu)
    w = w / w.sum()
    flux = w[:, None] * matrix_of(L)
    return float(np.max(np.abs(flux - flux.T)))


def is_reversible(
    L: "Generator | np.ndarray", mu: Vector, tol: float = constants.SYMMETRY_TOL
) -> tuple[bool, float]:
    residual = reversibility_residual(L, mu)
    return residual <= tol, residual
