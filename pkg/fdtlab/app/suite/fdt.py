"""The equilibrium fluctuation-dissipation identity and its static form."""

from __future__ import annotations

from typing import Optional

import numpy as np

from fdtlab.app.config.tolerances import DEFAULT_TOLERANCES, Tolerances
from fdtlab.app.infra.errors import DirectionMismatch
from fdtlab.app.infra.logger import get_logger
from fdtlab.app.markov.semigroup import Uniformized
from fdtlab.app.markov.types import Generator, Vector, matrix_of, values_of
from fdtlab.app.perturb.family import PerturbationFamily
from fdtlab.app.response.function import check_times, response_vector
from .covariance import (
    DerivativeMode,
    applicable_modes,
    covariance_s_derivative,
    numerical_s_derivative,
)
from .report import FdtReport, record

logger = get_logger(__name__)


def require_direction(fam: PerturbationFamily, f: Optional[Vector]) -> np.ndarray:
    """The family direction, after checking ``f`` against it when given.

    Raises:
        DirectionMismatch
    """
    direction = fam.f.values
    if f is None:
        return direction
    fv = values_of(f)
    if fv.shape != direction.shape or not np.allclose(fv, direction, rtol=0.0, atol=1e-14):
        raise DirectionMismatch()
    return direction


def static_residual(
    L: "Generator | np.ndarray", fam: PerturbationFamily, g_hat: Vector
) -> float:
    """|⟨(A_f + fL)ĝ⟩_{μ⁰}|."""
    mu = fam.mu0.normalize().weights
    g = values_of(g_hat)
    return abs(float(mu @ (fam.kernel.matrix @ g + fam.f.values * (matrix_of(L) @ g))))


def fdt_check(
    L: Generator,
    fam: PerturbationFamily,
    f: Optional[Vector],
    g: Vector,
    s: float,
    t: float,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    *,
    U: Optional[Uniformized] = None,
) -> FdtReport:
    """Compare ∂_s K_{f,g}(s,t) at μ⁰ with ⟨R(s,t)⟩_{μ⁰}.

    Produces an ``fdt_check`` row (the FDT residual) and an ``fdt_static``
    row (|⟨(A_f + fL)P_{t−s}g⟩_{μ⁰}|).

    Raises:
        DirectionMismatch: ``f`` differs from the family direction
        BadTimes
    """
    fv = require_direction(fam, f)
    s, t = check_times(s, t)
    mu = fam.mu0.normalize().weights
    U = U or Uniformized.of(L)

    lhs = covariance_s_derivative(
        mu, L, fv, g, s, t, DerivativeMode.INVARIANT, tolerances=tolerances, U=U
    )
    rhs = float(mu @ response_vector(U, fam.kernel.matrix, g, s, t))
    fdt_residual = abs(lhs - rhs)
    static = static_residual(L, fam, U.apply(t - s, g))

    family = fam.kind.value
    params = {"n": fam.n, "s": s, "t": t}
    logger.debug(
        "fdt check",
        extra={"extra_fields": {"kind": family, **params, "residual": fdt_residual,
                                "static": static}},
    )
    return FdtReport.of([
        record("fdt_check", family, fdt_residual, tolerances.fdt,
               metadata={"lhs": lhs, "rhs": rhs}, **params),
        record("fdt_static", family, static, tolerances.fdt, **params),
    ])


def static_identity_check(
    L: Generator,
    fam: PerturbationFamily,
    g: Vector,
    v_grid: tuple[float, ...] = (0.0, 0.3, 1.0),
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    *,
    U: Optional[Uniformized] = None,
) -> FdtReport:
    """|⟨(A_f + fL)P_v g⟩_{μ⁰}| for each v."""
    U = U or Uniformized.of(L)
    rows = []
    for v in v_grid:
        check_times(0.0, v)
        rows.append(record(
            "static_identity", fam.kind.value, static_residual(L, fam, U.apply(v, g)),
            tolerances.static, n=fam.n, v=float(v),
        ))
    return FdtReport.of(rows)


def lemma_consistency(
    nu: Vector,
    L: Generator,
    f: Vector,
    g: Vector,
    s: float,
    t: float,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    *,
    family: str = "-",
) -> FdtReport:
    """Agreement of every applicable ∂_s K formula with the general one and
    with the Richardson difference quotient."""
    U = Uniformized.of(L)
    modes = applicable_modes(nu, L, tolerances)
    values = {
        mode.value: covariance_s_derivative(nu, L, f, g, s, t, mode, tolerances=tolerances, U=U)
        for mode in modes
    }
    reference = values[DerivativeMode.GENERAL.value]
    numeric = numerical_s_derivative(nu, L, f, g, s, t, tolerances.richardson_step, U)
    rows = [
        record("lemma_mode_agreement", family, abs(value - reference), tolerances.mode_agreement,
               mode=mode, s=s, t=t)
        for mode, value in values.items()
        if mode != DerivativeMode.GENERAL.value
    ]
    rows.append(record(
        "lemma_numerical", family, abs(numeric - reference), tolerances.numerical_diff,
        s=s, t=t, metadata={"numerical": numeric, "analytic": reference},
    ))
    return FdtReport.of(rows)
