"""Two-time covariances K_{f,g}(s,t) and their s-derivatives.

K_{f,g}(s,t) = ⟨P_s(f P_{t−s}g)⟩_ν − ⟨P_s f⟩_ν ⟨P_t g⟩_ν

With h = P_{t−s}g and ν_s = νP_s the derivative in s has four forms:

  general    ⟨L(fh)⟩_{ν_s} − ⟨fLh⟩_{ν_s} − ⟨Lf⟩_{ν_s}⟨g⟩_{ν_t}
  gamma      ⟨Γ(f,h)⟩_{ν_s} + K_{Lf,g}(s,t)
  invariant  −⟨fLh⟩_ν                      (ν invariant)
  symmetric  ½⟨Γ(f,h)⟩_ν                   (ν invariant and L ν-symmetric)
"""

from __future__ import annotations

from enum import Enum
from typing import Optional

import numpy as np

from fdtlab.app.config import constants
from fdtlab.app.config.tolerances import DEFAULT_TOLERANCES, Tolerances
from fdtlab.app.infra.errors import ModePreconditionFailed, SuiteError, UnnormalizedInitial
from fdtlab.app.markov.adjoint import reversibility_residual
from fdtlab.app.markov.carre import carre_du_champ_values
from fdtlab.app.markov.invariant import invariance_residual
from fdtlab.app.markov.semigroup import Uniformized
from fdtlab.app.markov.types import Generator, Vector, matrix_of, values_of
from fdtlab.app.response.function import check_times


class DerivativeMode(str, Enum):
    GENERAL = "general"
    GAMMA = "gamma"
    INVARIANT = "invariant"
    SYMMETRIC = "symmetric"

    @classmethod
    def parse(cls, value: "str | DerivativeMode") -> "DerivativeMode":
        try:
            return cls(value)
        except ValueError as exc:
            raise SuiteError(f"unknown derivative mode '{value}'") from exc


def require_probability(nu: Vector, tol: float = constants.MEASURE_SUM_TOL) -> np.ndarray:
    """Raises UnnormalizedInitial unless ν is a probability vector."""
    w = values_of(nu)
    total = float(w.sum())
    if abs(total - 1.0) > tol or np.any(w < 0):
        raise UnnormalizedInitial(total)
    return w


def covariance(
    nu: Vector,
    L: "Generator | np.ndarray",
    f: Vector,
    g: Vector,
    s: float,
    t: float,
    U: Optional[Uniformized] = None,
) -> float:
    """K_{f,g}(s,t) under the initial law ν.

    Raises:
        BadTimes, UnnormalizedInitial
    """
    s, t = check_times(s, t)
    w = require_probability(nu)
    U = U or Uniformized.of(L)
    fv = values_of(f)
    nu_s = U.apply_left(s, w)
    h = U.apply(t - s, g)
    return float(nu_s @ (fv * h) - (nu_s @ fv) * (nu_s @ h))


def mode_residuals(
    nu: Vector, L: "Generator | np.ndarray"
) -> dict[str, float]:
    return {
        "invariance": invariance_residual(L, nu),
        "symmetry": reversibility_residual(L, nu),
    }


def applicable_modes(
    nu: Vector, L: "Generator | np.ndarray", tolerances: Tolerances = DEFAULT_TOLERANCES
) -> list[DerivativeMode]:
    residuals = mode_residuals(nu, L)
    modes = [DerivativeMode.GENERAL, DerivativeMode.GAMMA]
    if residuals["invariance"] <= tolerances.family_invariance:
        modes.append(DerivativeMode.INVARIANT)
        if residuals["symmetry"] <= tolerances.symmetry:
            modes.append(DerivativeMode.SYMMETRIC)
    return modes


def covariance_s_derivative(
    nu: Vector,
    L: "Generator | np.ndarray",
    f: Vector,
    g: Vector,
    s: float,
    t: float,
    mode: "str | DerivativeMode" = DerivativeMode.GENERAL,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    U: Optional[Uniformized] = None,
) -> float:
    """∂_s K_{f,g}(s,t) by the selected analytic formula.

    Raises:
        ModePreconditionFailed: ν not invariant (invariant/symmetric) or L not
            ν-symmetric (symmetric)
        BadTimes, UnnormalizedInitial
    """
    mode = DerivativeMode.parse(mode)
    s, t = check_times(s, t)
    w = require_probability(nu)
    M = matrix_of(L)
    U = U or Uniformized.of(M)
    fv = values_of(f)
    h = U.apply(t - s, g)

    if mode in (DerivativeMode.INVARIANT, DerivativeMode.SYMMETRIC):
        residual = invariance_residual(M, w)
        if residual > tolerances.family_invariance:
            raise ModePreconditionFailed(mode.value, residual, tolerances.family_invariance)
        if mode is DerivativeMode.SYMMETRIC:
            sym = reversibility_residual(M, w)
            if sym > tolerances.symmetry:
                raise ModePreconditionFailed(mode.value, sym, tolerances.symmetry)
            return 0.5 * float(w @ carre_du_champ_values(M, fv, h))
        return -float(w @ (fv * (M @ h)))

    nu_s = U.apply_left(s, w)
    Lf = M @ fv
    mean_g_t = float(nu_s @ h)
    if mode is DerivativeMode.GAMMA:
        gamma = float(nu_s @ carre_du_champ_values(M, fv, h))
        return gamma + float(nu_s @ (Lf * h)) - float(nu_s @ Lf) * mean_g_t
    return float(nu_s @ (M @ (fv * h)) - nu_s @ (fv * (M @ h)) - (nu_s @ Lf) * mean_g_t)


def numerical_s_derivative(
    nu: Vector,
    L: "Generator | np.ndarray",
    f: Vector,
    g: Vector,
    s: float,
    t: float,
    step: float = constants.RICHARDSON_STEP,
    U: Optional[Uniformized] = None,
) -> float:
    """Richardson-extrapolated difference quotient of s ↦ K(s,t).

    Central differences inside (step, t − step); one-sided second-order
    extrapolation at the ends of [0, t].
    """
    s, t = check_times(s, t)
    U = U or Uniformized.of(L)

    def K(x: float) -> float:
        return covariance(nu, L, f, g, x, t, U)

    if s - step >= 0 and s + step <= t:
        def central(h: float) -> float:
            return (K(s + h) - K(s - h)) / (2 * h)
        return (4 * central(step / 2) - central(step)) / 3
    sign = 1.0 if s + step <= t else -1.0
    k0 = K(s)

    def one_sided(h: float) -> float:
        return (K(s + sign * h) - k0) / (sign * h)
    return 2 * one_sided(step / 2) - one_sided(step)
