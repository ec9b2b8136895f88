"""Relaxation of the FDT defect from a non-stationary start."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from fdtlab.app.config.tolerances import DEFAULT_TOLERANCES, Tolerances
from fdtlab.app.infra.errors import EmptyGrid, Reducible
from fdtlab.app.infra.logger import get_logger
from fdtlab.app.markov.invariant import strong_components
from fdtlab.app.markov.norms import total_variation
from fdtlab.app.markov.semigroup import Uniformized
from fdtlab.app.markov.spectral import spectral_gap
from fdtlab.app.markov.types import Generator, Vector, matrix_of, values_of
from fdtlab.app.perturb.family import PerturbationFamily
from fdtlab.app.response.function import check_times, response_vector
from .covariance import DerivativeMode, covariance_s_derivative, require_probability
from .report import FdtReport, record

logger = get_logger(__name__)

DEFAULT_POINTS = 31
DEFAULT_HORIZON = 30.0


def default_s_grid(gap: float, points: int = DEFAULT_POINTS) -> list[float]:
    """Equally spaced s on [0, 30/gap]; the defect falls through the round-off floor."""
    end = DEFAULT_HORIZON / gap if gap > 0 else DEFAULT_HORIZON
    return [float(s) for s in np.linspace(0.0, end, points)]


def fit_decay_rate(
    s_values: Iterable[float], defects: Iterable[float], floor: float
) -> tuple[float, int]:
    """−slope of log d(s) over the later half of the points above ``floor``.

    Returns (nan, k) when fewer than two points remain.
    """
    s = np.asarray(list(s_values), dtype=np.float64)
    d = np.asarray(list(defects), dtype=np.float64)
    usable = np.flatnonzero(d > floor)
    if usable.size >= 4:
        usable = usable[usable.size // 2:]
    if usable.size < 2:
        return math.nan, int(usable.size)
    slope, _ = np.polyfit(s[usable], np.log(d[usable]), 1)
    return float(-slope), int(usable.size)


def derivative_limit(L: Generator, mu0: Vector, f: Vector, g: Vector, tau: float) -> float:
    """⟨L(f P_τ g)⟩_μ − ⟨f P_τ L g⟩_μ − ⟨Lf⟩_μ⟨P_τ g⟩_μ at the invariant measure."""
    check_times(0.0, tau)
    mu = require_probability(mu0)
    M = matrix_of(L)
    U = Uniformized.of(M)
    fv = values_of(f)
    h = U.apply(tau, g)
    return float(mu @ (M @ (fv * h)) - mu @ (fv * U.apply(tau, M @ values_of(g)))
                 - (mu @ (M @ fv)) * (mu @ h))


@dataclass(frozen=True)
class RelaxationScan:
    s_grid: tuple[float, ...]
    defects: tuple[float, ...]
    tv: tuple[float, ...]
    gap: float
    rate: float
    limit: float
    terminal_response: float
    report: FdtReport

    def rows(self) -> list[dict]:
        return [{"s": s, "d": d, "tv": tv} for s, d, tv in zip(self.s_grid, self.defects, self.tv)]


def near_equilibrium_scan(
    nu0: Vector,
    L: Generator,
    fam: PerturbationFamily,
    g: Vector,
    tau: float,
    s_grid: Optional[Iterable[float]] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> RelaxationScan:
    """d(s) = |∂_s K(s, s+τ) − ⟨R(s, s+τ)⟩_{ν₀}| along an s grid.

    Rows: one ``near_equilibrium_defect`` per s (informational, TV(ν_s, μ⁰)
    in metadata), ``near_equilibrium_rate`` (fitted decay rate against the
    spectral gap) and ``near_equilibrium_limit`` (terminal response against
    −⟨f L P_τ g⟩_{μ⁰}).

    Raises:
        Reducible, EmptyGrid, BadTimes, UnnormalizedInitial
    """
    components = strong_components(L)
    if components != 1:
        raise Reducible(components)
    check_times(0.0, tau)
    w = require_probability(nu0)
    gap = spectral_gap(L)
    grid = sorted(float(s) for s in (s_grid if s_grid is not None else default_s_grid(gap)))
    if not grid:
        raise EmptyGrid("s")
    for s in grid:
        check_times(0.0, s)

    U = Uniformized.of(L)
    mu = fam.mu0.normalize().weights
    f = fam.f.values
    family = fam.kind.value

    defects, tvs, responses = [], [], []
    for s in grid:
        t = s + tau
        derivative = covariance_s_derivative(
            w, L, f, g, s, t, DerivativeMode.GENERAL, tolerances=tolerances, U=U
        )
        response = float(w @ response_vector(U, fam.kernel.matrix, g, s, t))
        defects.append(abs(derivative - response))
        responses.append(response)
        tvs.append(total_variation(U.apply_left(s, w), mu))

    rows = [
        record("near_equilibrium_defect", family, d, math.inf, s=s, tau=tau,
               metadata={"tv": tv})
        for s, d, tv in zip(grid, defects, tvs)
    ]

    rate, used = fit_decay_rate(grid, defects, tolerances.roundoff_floor)
    if used < 2:
        # already at equilibrium to round-off
        rate_residual = 0.0
    else:
        rate_residual = abs(rate - gap) / gap if gap > 0 else math.inf
    rows.append(record(
        "near_equilibrium_rate", family, rate_residual, tolerances.gap_rate_rel, tau=tau,
        metadata={"rate": rate, "gap": gap, "points": used},
    ))

    limit = -float(mu @ (f * (matrix_of(L) @ U.apply(tau, g))))
    rows.append(record(
        "near_equilibrium_limit", family, abs(responses[-1] - limit),
        defects[-1] + tolerances.limit_extra, tau=tau, s_max=grid[-1],
        metadata={"limit": limit, "terminal_response": responses[-1]},
    ))

    report = FdtReport.of(rows)
    logger.info(
        "near-equilibrium scan",
        extra={"extra_fields": {"kind": family, "points": len(grid), "gap": gap, "rate": rate,
                                "passed": report.all_passed}},
    )
    return RelaxationScan(
        s_grid=tuple(grid),
        defects=tuple(defects),
        tv=tuple(tvs),
        gap=gap,
        rate=rate,
        limit=limit,
        terminal_response=responses[-1],
        report=report,
    )
