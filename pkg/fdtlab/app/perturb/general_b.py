"""Perturbations generated by a balanced rate increment b.

rates  ĉ₀^{δf}(x,y) = e^{−δf(x)} (c(x,y) + δ b(x,y))
kernel a(x,y)       = b(x,y) − f(x)c(x,y)

b must satisfy μ⁰(x) Σ_y b(x,y) = Σ_y μ⁰(y) b(y,x) and be bounded below
by −ρ c; the family is then valid for δ ≤ 1/ρ.
"""

from __future__ import annotations

import math
from typing import Literal

import numpy as np

from fdtlab.app.config import constants
from fdtlab.app.infra.errors import BalanceViolation, PerturbationError, UnboundedBelow
from fdtlab.app.infra.logger import get_logger
from fdtlab.app.markov.adjoint import adjoint_matrix, is_reversible
from fdtlab.app.markov.types import Generator, Measure, Observable
from .family import FamilyKind, PerturbationFamily, ResponseKernel
from .langevin import _require_nonnegative, langevin_family

logger = get_logger(__name__)


def balance_residual(mu0: Measure, b: np.ndarray) -> float:
    """max_x |μ(x)Σ_y b(x,y) − Σ_y μ(y)b(y,x)| with μ as a probability."""
    w = mu0.weights / mu0.weights.sum()
    off = np.array(b, dtype=np.float64, copy=True)
    np.fill_diagonal(off, 0.0)
    outflow = w * off.sum(axis=1)
    inflow = w @ off
    return float(np.max(np.abs(outflow - inflow)))


def lower_bound_ratio(c: np.ndarray, b: np.ndarray) -> float:
    """ρ = max(0, max over c>0 of −b/c).

    Raises:
        UnboundedBelow: b(x,y) < 0 where c(x,y) = 0
    """
    off_c = np.array(c, copy=True)
    off_b = np.array(b, dtype=np.float64, copy=True)
    np.fill_diagonal(off_c, 0.0)
    np.fill_diagonal(off_b, 0.0)
    scale = max(1.0, float(np.max(np.abs(off_b))))
    zero = off_c <= 0
    bad = zero & (off_b < -1e-14 * scale)
    if np.any(bad):
        x, y = (int(i) for i in np.argwhere(bad)[0])
        raise UnboundedBelow(x, y, float(off_b[x, y]))
    positive = ~zero
    if not np.any(positive):
        return 0.0
    return max(0.0, float(np.max(-off_b[positive] / off_c[positive])))


def general_b_family(
    L: Generator,
    mu0: Measure,
    f: Observable,
    b: np.ndarray,
    *,
    variant: Literal["time_change", "langevin"] = "time_change",
    balance_tol: float = constants.BALANCE_TOL,
) -> PerturbationFamily:
    """Family driven by an arbitrary balanced increment b.

    ``variant="langevin"`` realizes the same kernel on top of the Langevin
    rates: ĉ₁ = c₁^{δf} + e^{−δf(x)}(δb − ½δf(y)c − ½δf(x)c*), which
    requires f ≥ 0 on non-reversible bases.

    Raises:
        BalanceViolation: b fails the balance condition
        UnboundedBelow: b < 0 where c = 0
    """
    b = np.array(b, dtype=np.float64, copy=True)
    if b.shape != (L.n, L.n):
        raise PerturbationError(f"b has shape {b.shape}, expected ({L.n}, {L.n})")
    np.fill_diagonal(b, 0.0)
    residual = balance_residual(mu0, b)
    scale = max(1.0, float(np.max(np.abs(b))))
    if residual > balance_tol * scale:
        raise BalanceViolation(residual, balance_tol)
    c = L.offdiag
    rho = lower_bound_ratio(c, b)
    cap = math.inf if rho == 0 else 1.0 / rho
    fv = f.values
    kernel = ResponseKernel.from_offdiag(L.space, b - fv[:, None] * c)
    logger.debug(
        "general b family",
        extra={"extra_fields": {"n": L.n, "balance_residual": residual, "rho": rho}},
    )

    if variant == "time_change":
        def rates(delta: float) -> np.ndarray:
            return np.exp(-delta * fv)[:, None] * (c + delta * b)
        symmetric = False
    elif variant == "langevin":
        reversible, _ = is_reversible(L, mu0)
        _require_nonnegative(f, reversible)
        base_langevin = langevin_family(L, mu0, f)
        c_star = c if reversible else adjoint_matrix(L, mu0)
        np.fill_diagonal(c_star, 0.0)

        def rates(delta: float) -> np.ndarray:
            correction = delta * (b - 0.5 * fv[None, :] * c - 0.5 * fv[:, None] * c_star)
            return base_langevin.rates_fn(delta) + np.exp(-delta * fv)[:, None] * correction
        symmetric = False
    else:
        raise PerturbationError(f"unknown general_b variant '{variant}'")

    return PerturbationFamily(
        kind=FamilyKind.GENERAL_B,
        base=L,
        mu0=mu0,
        f=f,
        kernel=kernel,
        rates_fn=rates,
        delta_cap=cap,
        symmetric=symmetric,
        rebuild=lambda g: general_b_family(
            L, mu0, g, _rescale_b(b, f, g), variant=variant, balance_tol=balance_tol
        ),
        params={"rho": rho, "variant": variant, "balance_residual": residual},
    )


def _rescale_b(b: np.ndarray, f: Observable, g: Observable) -> np.ndarray:
    """b^{rf} = r b^f when g = r f; b is kept otherwise."""
    fv, gv = f.values, g.values
    norm = float(np.dot(fv, fv))
    if norm == 0:
        return b
    r = float(np.dot(fv, gv)) / norm
    if np.allclose(gv, r * fv, rtol=1e-12, atol=1e-14) and r >= 0:
        return r * b
    return b


def adjoint_difference(L: Generator, mu0: Measure) -> np.ndarray:
    """b = c* − c, always balanced, ρ ≤ 1."""
    b = adjoint_matrix(L, mu0) - L.rates
    np.fill_diagonal(b, 0.0)
    return b
