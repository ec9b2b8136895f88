"""Response functions R(s,t) = P_s A_f P_{t−s} g and their time integrals."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy.integrate import simpson

from fdtlab.app.config import constants
from fdtlab.app.infra.errors import BadTimes
from fdtlab.app.markov.semigroup import Uniformized, uniformized_convolution
from fdtlab.app.markov.types import Generator, Observable, Vector, matrix_of, values_of
from fdtlab.app.perturb.family import PerturbationFamily


def check_times(s: float, t: float) -> tuple[float, float]:
    """Validate 0 ≤ s ≤ t.

    Raises:
        BadTimes
    """
    s, t = float(s), float(t)
    if not (math.isfinite(s) and math.isfinite(t)):
        raise BadTimes(f"times must be finite (s={s}, t={t})")
    if s < 0 or t < 0:
        raise BadTimes(f"times must be nonnegative (s={s}, t={t})")
    if s > t:
        raise BadTimes(f"need s <= t (s={s}, t={t})")
    return s, t


def response_vector(
    U: Uniformized, kernel: np.ndarray, g: Vector, s: float, t: float
) -> np.ndarray:
    """P_s A P_{t−s} g on a prepared semigroup."""
    s, t = check_times(s, t)
    return U.apply(s, kernel @ U.apply(t - s, g))


def response_function(
    L: Generator, fam: PerturbationFamily, g: "Observable | np.ndarray", s: float, t: float
) -> Observable:
    """R(s,t) = P_s A_f P_{t−s} g; ⟨R(s,t)⟩_ν is a dot product with ν.

    Raises:
        BadTimes: s > t or a negative time
    """
    values = response_vector(Uniformized.of(L), fam.kernel.matrix, g, s, t)
    return Observable(L.space, values)


def convolution_integral(
    L_matrix: "Generator | np.ndarray",
    A_matrix: np.ndarray,
    g: Vector,
    t: float,
    *,
    L_right: "Generator | np.ndarray | None" = None,
    tol: float = constants.EXPM_TAIL_TOL,
) -> np.ndarray:
    """∫₀ᵗ P_s A P'_{t−s} g ds from the corner block of exp(t[[L, A], [0, L']]).

    L' defaults to L. With L' = 0 and A = I this is ∫₀ᵗ P_s g ds.
    """
    if t < 0:
        raise BadTimes(f"need t >= 0 (t={t})")
    return uniformized_convolution(L_matrix, A_matrix, g, t, L_right=L_right, tol=tol)


def response_integral(
    L: Generator, fam: PerturbationFamily, g_hat: "Observable | np.ndarray", t: float
) -> Observable:
    """∫₀ᵗ P_s A_f P_{t−s} ĝ ds, exact up to the exponential truncation.

    Raises:
        BadTimes: t < 0
    """
    check_times(0.0, t)
    return Observable(L.space, convolution_integral(L, fam.kernel.matrix, g_hat, t))


def simpson_response_integral(
    L: "Generator | np.ndarray",
    A: np.ndarray,
    g: Vector,
    t: float,
    panels: int = constants.SIMPSON_PANELS,
) -> np.ndarray:
    """Composite Simpson quadrature of s ↦ P_s A P_{t−s} g over an even panel count.

    Uses powers of P_{t/panels}; intended as an oracle for small chains.
    """
    check_times(0.0, t)
    v = values_of(g)
    if t == 0:
        return np.zeros_like(v)
    panels = panels + (panels % 2)
    h = t / panels
    step = Uniformized.of(matrix_of(L)).matrix(h)
    powers = [np.eye(step.shape[0])]
    for _ in range(panels):
        powers.append(powers[-1] @ step)
    A = np.asarray(A, dtype=np.float64)
    integrand = np.stack(
        [powers[i] @ (A @ (powers[panels - i] @ v)) for i in range(panels + 1)]
    )
    return simpson(integrand, dx=h, axis=0)


def response_expectation(
    nu: Vector, L: Generator, fam: PerturbationFamily, g: Vector, s: float, t: float,
    U: Optional[Uniformized] = None,
) -> float:
    """⟨R(s,t)⟩_ν."""
    U = U or Uniformized.of(L)
    return float(values_of(nu) @ response_vector(U, fam.kernel.matrix, g, s, t))
