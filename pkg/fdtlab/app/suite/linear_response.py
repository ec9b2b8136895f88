"""Verdict rows for the δ → 0 limit: η_δ slope, final η, monotonicity and
kernel convergence."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

from fdtlab.app.config.tolerances import DEFAULT_TOLERANCES, Tolerances
from fdtlab.app.infra.logger import get_logger
from fdtlab.app.markov.norms import l2_norm, sup_norm
from fdtlab.app.markov.types import Generator, Vector, values_of
from fdtlab.app.perturb.family import FamilyKind, PerturbationFamily
from fdtlab.app.response.convergence import (
    KernelConvergence,
    SweepResult,
    delta_sweep,
    kernel_norm_convergence,
)
from .report import FdtReport, record

logger = get_logger(__name__)


def slope_floor(fam: PerturbationFamily, tolerances: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Minimum η slope: the Langevin family on a non-reversible base converges
    only in L²(μ⁰) and at a reduced rate."""
    if fam.kind is FamilyKind.LANGEVIN and not fam.symmetric:
        return tolerances.slope_min_langevin
    return tolerances.slope_min_smooth


def _observable_norm(fam: PerturbationFamily, g: Vector, norm: str) -> float:
    gv = values_of(g)
    if norm == "l2":
        return l2_norm(gv, fam.mu0.normalize().weights)
    return sup_norm(gv)


def sweep_report(
    fam: PerturbationFamily,
    g: Vector,
    sweep: SweepResult,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> FdtReport:
    family = fam.kind.value
    floor = slope_floor(fam, tolerances)
    eta_final = sweep.eta[-1]
    g_norm = _observable_norm(fam, g, sweep.norm)
    final_tol = tolerances.eta_final_rel * max(g_norm, tolerances.roundoff_floor)
    if math.isnan(sweep.slope):
        # η already at round-off on the whole grid
        slope_residual = 0.0 if max(sweep.eta) <= final_tol else math.inf
    else:
        slope_residual = max(0.0, floor - sweep.slope)
    params = {"t": sweep.params.get("t"), "norm": sweep.norm}
    return FdtReport.of([
        record("response_slope", family, slope_residual, 0.0, **params,
               metadata={"slope": sweep.slope, "floor": floor}),
        record("response_eta_final", family, eta_final, final_tol, delta=sweep.deltas[-1],
               **params, metadata={"g_norm": g_norm}),
        record("response_monotone", family, 0.0 if sweep.monotone else 1.0, 0.0, **params,
               metadata={"eta": list(sweep.eta)}),
    ])


def kernel_report(
    fam: PerturbationFamily,
    convergence: KernelConvergence,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> FdtReport:
    """|slope − 1| of the operator-norm kernel residual."""
    if math.isnan(convergence.slope):
        residual = 0.0 if max(convergence.residuals) <= tolerances.roundoff_floor else math.inf
    else:
        residual = abs(convergence.slope - 1.0)
    return FdtReport.of([
        record("kernel_slope", fam.kind.value, residual, tolerances.kernel_slope_band,
               metadata={"slope": convergence.slope, "residuals": list(convergence.residuals)}),
    ])


@dataclass(frozen=True)
class LinearResponseResult:
    sweep: SweepResult
    kernel: KernelConvergence
    report: FdtReport


def linear_response_check(
    L: Generator,
    fam: PerturbationFamily,
    g: Vector,
    t: float,
    deltas: Optional[Iterable[float]] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    *,
    a: float = 0.0,
    b: float = 0.0,
) -> LinearResponseResult:
    """δ-sweep of the windowed finite-difference response and the kernel
    convergence on the same grid.

    Raises:
        EmptyGrid, DeltaTooLarge, BadTimes
    """
    grid = list(deltas) if deltas is not None else None
    sweep = delta_sweep(L, fam, g, t, grid, a=a, b=b)
    kernel = kernel_norm_convergence(fam, sweep.deltas)
    report = FdtReport.merge_all([
        sweep_report(fam, g, sweep, tolerances),
        kernel_report(fam, kernel, tolerances),
    ])
    logger.debug(
        "linear response check",
        extra={"extra_fields": {"kind": fam.kind.value, "slope": sweep.slope,
                                "kernel_slope": kernel.slope, "passed": report.all_passed}},
    )
    return LinearResponseResult(sweep, kernel, report)
