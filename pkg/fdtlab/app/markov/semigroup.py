"""Markov semigroups P_t = exp(tL) by uniformization.

exp(tL) = Σ_k Poisson(k; λt) Q^k with Q = I + L/λ and λ = max exit rate.
Q is stochastic, so P_t g stays inside the convex hull of g and P_t
applied to a probability vector stays a probability vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import poisson

from fdtlab.app.config import constants
from fdtlab.app.infra.errors import NegativeTime
from fdtlab.app.infra.logger import get_logger
from .types import Generator, Observable, Vector, matrix_of, values_of

logger = get_logger(__name__)


def poisson_window(mean: float, tol: float) -> tuple[int, int, np.ndarray]:
    """Index range [k_lo, k_hi] holding all but ``tol`` of Poisson(mean) mass, with weights."""
    if mean <= 0:
        return 0, 0, np.ones(1)
    k_lo = int(poisson.ppf(tol / 2.0, mean))
    k_lo = max(k_lo - 1, 0)
    k_hi_f = poisson.isf(tol / 2.0, mean)
    if not math.isfinite(k_hi_f):
        k_hi_f = mean + 12.0 * math.sqrt(mean) + 40.0
    k_hi = max(int(k_hi_f) + 1, k_lo)
    ks = np.arange(k_lo, k_hi + 1)
    return k_lo, k_hi, poisson.pmf(ks, mean)


def _check_time(t: float) -> float:
    t = float(t)
    if t < 0 or not math.isfinite(t):
        raise NegativeTime(t)
    return t


@dataclass(frozen=True, eq=False)
class Uniformized:
    """A generator prepared for repeated exponentials (λ and Q cached)."""

    rate: float
    Q: np.ndarray
    tol: float = constants.EXPM_TAIL_TOL

    @classmethod
    def of(cls, L: "Generator | np.ndarray", tol: float = constants.EXPM_TAIL_TOL) -> "Uniformized":
        M = matrix_of(L)
        rate = float(np.max(-np.diag(M))) if M.size else 0.0
        if rate <= 0:
            return cls(0.0, np.eye(M.shape[0]), tol)
        return cls(rate, np.eye(M.shape[0]) + M / rate, tol)

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    def apply(self, t: float, g: Vector) -> np.ndarray:
        """P_t g."""
        return self._series(t, values_of(g), self.Q)

    def apply_left(self, t: float, nu: Vector) -> np.ndarray:
        """ν P_t (law at time t started from ν)."""
        return self._series(t, values_of(nu), self.Q.T)

    def _series(self, t: float, v: np.ndarray, Q: np.ndarray) -> np.ndarray:
        t = _check_time(t)
        if t == 0 or self.rate == 0:
            return np.array(v, dtype=np.float64, copy=True)
        k_lo, k_hi, weights = poisson_window(self.rate * t, self.tol)
        out = np.zeros_like(v, dtype=np.float64)
        power = np.array(v, dtype=np.float64, copy=True)
        for k in range(k_hi + 1):
            if k >= k_lo:
                out += weights[k - k_lo] * power
            if k < k_hi:
                power = Q @ power
        return out

    def matrix(self, t: float) -> np.ndarray:
        """P_t as a dense matrix (scaling and squaring on top of uniformization)."""
        t = _check_time(t)
        n = self.n
        if t == 0 or self.rate == 0:
            return np.eye(n)
        squarings = max(0, math.ceil(math.log2(self.rate * t / 2.0))) if self.rate * t > 2 else 0
        step = t / (2**squarings)
        k_lo, k_hi, weights = poisson_window(self.rate * step, self.tol / (2**squarings + 1))
        P = np.zeros((n, n))
        power = np.eye(n)
        for k in range(k_hi + 1):
            if k >= k_lo:
                P += weights[k - k_lo] * power
            if k < k_hi:
                power = power @ self.Q
        for _ in range(squarings):
            P = P @ P
        return P


def uniformized_convolution(
    L_left: "Generator | np.ndarray",
    A: np.ndarray,
    g: Vector,
    t: float,
    *,
    L_right: "Generator | np.ndarray | None" = None,
    tol: float = constants.EXPM_TAIL_TOL,
) -> np.ndarray:
    """∫₀ᵗ e^{sL_left} A e^{(t−s)L_right} g ds.

    This is the upper-right block of exp(t·[[L_left, A], [0, L_right]])
    applied to (0, g), evaluated by uniformizing the block matrix with the
    common rate λ. The vector pair (u_k, w_k) follows
    w_{k+1} = Q_r w_k and u_{k+1} = Q_l u_k + (A/λ) w_k.
    """
    t = _check_time(t)
    left = matrix_of(L_left)
    right = left if L_right is None else matrix_of(L_right)
    A = np.asarray(A, dtype=np.float64)
    v = values_of(g)
    if t == 0:
        return np.zeros(left.shape[0])
    rate = max(
        float(np.max(-np.diag(left))),
        float(np.max(-np.diag(right))) if right.size else 0.0,
    )
    if rate <= 0:
        # both generators frozen: the integrand is constant
        return t * (A @ v)
    n_left = left.shape[0]
    Q_left = np.eye(n_left) + left / rate
    Q_right = np.eye(right.shape[0]) + right / rate
    A_scaled = A / rate
    a_norm = float(np.max(np.abs(A).sum(axis=1))) if A.size else 0.0
    k_lo, k_hi, weights = poisson_window(rate * t, tol / (1.0 + a_norm * t))
    u = np.zeros(n_left)
    w = np.array(v, copy=True)
    out = np.zeros(n_left)
    for k in range(k_hi + 1):
        if k >= k_lo:
            out += weights[k - k_lo] * u
        if k < k_hi:
            u, w = Q_left @ u + A_scaled @ w, Q_right @ w
    return out


def semigroup_apply(
    L: Generator, t: float, g: "Observable | np.ndarray", tol: Optional[float] = None
) -> Observable:
    """P_t g for a validated generator.

    Raises:
        NegativeTime: t < 0
    """
    values = Uniformized.of(L, tol or constants.EXPM_TAIL_TOL).apply(t, g)
    return Observable(L.space, values)


def transition_matrix(L: Generator, t: float) -> np.ndarray:
    """P_t as a row-stochastic matrix."""
    return Uniformized.of(L).matrix(t)


def evolve_measure(L: "Generator | np.ndarray", t: float, nu: Vector) -> np.ndarray:
    """ν_t = ν P_t."""
    return Uniformized.of(L).apply_left(t, nu)
