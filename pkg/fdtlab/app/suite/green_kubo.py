"""Green–Kubo representation of −⟨f L g⟩_{μ⁰} for reversible chains."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from fdtlab.app.config.getter import get_numerics_config
from fdtlab.app.config.tolerances import DEFAULT_TOLERANCES, Tolerances
from fdtlab.app.infra.errors import NotReversible
from fdtlab.app.infra.logger import get_logger
from fdtlab.app.markov.adjoint import reversibility_residual
from fdtlab.app.markov.carre import carre_du_champ_values
from fdtlab.app.markov.norms import l2_norm
from fdtlab.app.markov.semigroup import Uniformized
from fdtlab.app.markov.spectral import spectral_gap
from fdtlab.app.markov.types import Generator, Vector, matrix_of, values_of
from fdtlab.app.response.function import check_times, convolution_integral
from .covariance import require_probability
from .report import FdtReport, record

logger = get_logger(__name__)

_TINY = 1e-14


@dataclass(frozen=True)
class GreenKuboResult:
    lhs: float
    middle: float
    rhs: float
    residual: float
    tolerance: float
    tail: float
    horizon: float

    def report(self, tolerances: Tolerances, family: str = "-", **params) -> FdtReport:
        identity_tol = tolerances.green_kubo_identity * max(1.0, abs(self.lhs))
        return FdtReport.of([
            record("green_kubo", family, self.residual, self.tolerance,
                   horizon=self.horizon, **params,
                   metadata={"lhs": self.lhs, "rhs": self.rhs, "tail": self.tail}),
            record("green_kubo_identity", family, abs(self.lhs - self.middle), identity_tol,
                   **params, metadata={"lhs": self.lhs, "middle": self.middle}),
        ])


def _require_reversible(M: np.ndarray, mu: np.ndarray, tolerances: Tolerances) -> None:
    residual = reversibility_residual(M, mu)
    if residual > tolerances.symmetry:
        raise NotReversible(residual, tolerances.symmetry)


def current_integral(
    M: np.ndarray, mu: np.ndarray, f: np.ndarray, g: np.ndarray, horizon: float
) -> float:
    """∫₀^T ⟨(P_s Lf)(Lg)⟩_μ ds through the block exponential with a frozen right block."""
    n = M.shape[0]
    integrated = convolution_integral(M, np.eye(n), M @ f, horizon, L_right=np.zeros((n, n)))
    return float(mu @ (integrated * (M @ g)))


def green_kubo(
    L: "Generator | np.ndarray",
    mu0: Vector,
    f: Vector,
    g: Vector,
    T_max: Optional[float] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> GreenKuboResult:
    """−⟨f L g⟩_{μ⁰}, ½⟨Γ(f,g)⟩_{μ⁰} and the truncated current–current integral.

    The horizon defaults to 50/gap; the tail bound e^{−gap T}/gap · ‖Lf‖₂‖Lg‖₂
    is added to the reported tolerance.

    Raises:
        NotReversible
    """
    M = matrix_of(L)
    mu = require_probability(mu0)
    _require_reversible(M, mu, tolerances)
    fv, gv = values_of(f), values_of(g)

    gap = spectral_gap(M)
    if T_max is None:
        T_max = integration_horizon(gap)
    check_times(0.0, T_max)

    lhs = -float(mu @ (fv * (M @ gv)))
    middle = 0.5 * float(mu @ carre_du_champ_values(M, fv, gv))
    rhs = current_integral(M, mu, fv, gv, T_max)

    if gap > 0:
        tail = math.exp(-gap * T_max) / gap * l2_norm(M @ fv, mu) * l2_norm(M @ gv, mu)
    else:
        tail = math.inf
    tolerance = tolerances.green_kubo_rel * abs(lhs) + tail + _TINY
    residual = abs(rhs - lhs)
    logger.debug(
        "green-kubo",
        extra={"extra_fields": {"n": M.shape[0], "lhs": lhs, "rhs": rhs, "horizon": T_max,
                                "tail": tail}},
    )
    return GreenKuboResult(lhs, middle, rhs, residual, tolerance, tail, float(T_max))


def integration_horizon(gap: float) -> float:
    horizon = get_numerics_config()["green_kubo_horizon"]
    return horizon / gap if gap > 0 else horizon


def green_kubo_dissipation(
    L: "Generator | np.ndarray",
    mu0: Vector,
    f: Vector,
    g: Vector,
    s: float,
    t: float,
    T_max: Optional[float] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """∂_s K_{f,g}(s,t) at equilibrium as ∫₀^∞⟨(P_u Lf)(L P_{t−s}g)⟩ du.

    Raises:
        NotReversible, BadTimes
    """
    s, t = check_times(s, t)
    M = matrix_of(L)
    mu = require_probability(mu0)
    _require_reversible(M, mu, tolerances)
    h = Uniformized.of(M).apply(t - s, g)
    if T_max is None:
        T_max = integration_horizon(spectral_gap(M))
    return current_integral(M, mu, values_of(f), h, T_max)
