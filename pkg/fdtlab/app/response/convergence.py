"""δ-sweeps, kernel convergence and log-log slope fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from fdtlab.app.config import constants
from fdtlab.app.infra.errors import EmptyGrid
from fdtlab.app.infra.logger import get_logger
from fdtlab.app.markov.norms import operator_sup_norm
from fdtlab.app.markov.types import Generator, Vector
from fdtlab.app.perturb.family import PerturbationFamily
from .finite_difference import windowed_response_check

logger = get_logger(__name__)


def dyadic_deltas(
    lo: int = constants.DELTA_MIN_EXPONENT, hi: int = constants.DELTA_MAX_EXPONENT
) -> list[float]:
    """2^-lo, ..., 2^-hi (decreasing)."""
    return [2.0**-k for k in range(lo, hi + 1)]


def fit_loglog_slope(
    xs: Sequence[float], ys: Sequence[float], floor: float = constants.ROUNDOFF_FLOOR
) -> float:
    """Least-squares slope of log y against log x, skipping y at or below ``floor``.

    Returns nan with fewer than two usable points.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    keep = (x > 0) & (y > floor) & np.isfinite(y)
    if np.count_nonzero(keep) < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)
    return float(slope)


def is_monotone_decreasing(values: Sequence[float], jitter: float = constants.MONOTONE_JITTER,
                           floor: float = constants.ROUNDOFF_FLOOR) -> bool:
    """Each value at most (1 + jitter) times its predecessor, ignoring the round-off floor."""
    for prev, cur in zip(values, values[1:]):
        if cur <= floor:
            continue
        if cur > prev * (1.0 + jitter):
            return False
    return True


@dataclass(frozen=True)
class SweepResult:
    deltas: tuple[float, ...]
    eta: tuple[float, ...]
    eta_sup: tuple[float, ...]
    eta_l2: tuple[float, ...]
    norm: str
    slope: float
    monotone: bool
    params: dict = field(default_factory=dict)

    def rows(self) -> list[dict]:
        return [
            {"delta": d, "eta": e, "eta_sup": s, "eta_l2": l2}
            for d, e, s, l2 in zip(self.deltas, self.eta, self.eta_sup, self.eta_l2)
        ]


def delta_sweep(
    L: Generator,
    fam: PerturbationFamily,
    g: Vector,
    t: float,
    deltas: Iterable[float] | None = None,
    *,
    a: float = 0.0,
    b: float = 0.0,
) -> SweepResult:
    """η_δ over a δ grid (dyadic 2⁻³..2⁻¹⁰ by default) with the fitted slope.

    Raises:
        EmptyGrid: empty δ grid
    """
    grid = sorted({float(d) for d in (deltas if deltas is not None else dyadic_deltas())},
                  reverse=True)
    if not grid:
        raise EmptyGrid("delta")
    results = [windowed_response_check(L, fam, g, a, b, t, d) for d in grid]
    eta = tuple(r.eta for r in results)
    sweep = SweepResult(
        deltas=tuple(grid),
        eta=eta,
        eta_sup=tuple(r.eta_sup for r in results),
        eta_l2=tuple(r.eta_l2 for r in results),
        norm=results[0].norm,
        slope=fit_loglog_slope(grid, eta),
        monotone=is_monotone_decreasing(eta),
        params={"t": t, "a": a, "b": b, "kind": fam.kind.value},
    )
    logger.info(
        "delta sweep",
        extra={"extra_fields": {"kind": fam.kind.value, "slope": sweep.slope,
                                "monotone": sweep.monotone, "points": len(grid)}},
    )
    return sweep


@dataclass(frozen=True)
class KernelConvergence:
    deltas: tuple[float, ...]
    residuals: tuple[float, ...]
    slope: float

    def rows(self) -> list[dict]:
        return [{"delta": d, "residual": r} for d, r in zip(self.deltas, self.residuals)]


def kernel_residual(fam: PerturbationFamily, delta: float) -> float:
    """‖δ⁻¹(L^{δf} − L) − A_f‖ in the induced sup-norm."""
    L_delta = fam.generator_at(delta)
    return operator_sup_norm((L_delta.rates - fam.base.rates) / delta - fam.kernel.matrix)


def kernel_norm_convergence(
    fam: PerturbationFamily, delta_grid: Iterable[float] | None = None
) -> KernelConvergence:
    """Operator-norm residual per δ and the fitted log-log slope.

    Raises:
        EmptyGrid: empty δ grid
    """
    grid = sorted({float(d) for d in (delta_grid if delta_grid is not None else dyadic_deltas())},
                  reverse=True)
    if not grid:
        raise EmptyGrid("delta")
    residuals = tuple(kernel_residual(fam, d) for d in grid)
    return KernelConvergence(tuple(grid), residuals, fit_loglog_slope(grid, residuals))
