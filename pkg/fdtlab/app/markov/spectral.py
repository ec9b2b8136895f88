"""Spectral gap of a generator."""

from __future__ import annotations

import numpy as np
from scipy.linalg import eigvals

from .types import Generator, matrix_of


def spectrum(L: "Generator | np.ndarray") -> np.ndarray:
    return eigvals(matrix_of(L))


def spectral_gap(L: "Generator | np.ndarray") -> float:
    """min Re(−λ) over the nonzero eigenvalues; 0.0 for a frozen chain."""
    M = matrix_of(L)
    scale = max(1.0, float(np.max(np.abs(M))))
    values = spectrum(M)
    nonzero = values[np.abs(values) > 1e-9 * scale]
    if nonzero.size == 0:
        return 0.0
    return float(np.min(-nonzero.real))


def has_simple_gap(L: "Generator | np.ndarray", rel_sep: float = 0.05) -> bool:
    """True when a single real eigenvalue attains the gap, separated from the rest."""
    M = matrix_of(L)
    scale = max(1.0, float(np.max(np.abs(M))))
    values = spectrum(M)
    nonzero = values[np.abs(values) > 1e-9 * scale]
    if nonzero.size == 0:
        return False
    rates = np.sort(-nonzero.real)
    leading = nonzero[np.argmin(-nonzero.real)]
    if abs(leading.imag) > 1e-9 * scale:
        return False
    return rates.size == 1 or rates[1] > rates[0] * (1.0 + rel_sep)
