"""Finite-volume birth–death chains approximating the circle diffusion.

c(x, x ± h) = 1/h² ± b_δ(x)/(2h) on n equally spaced points. The chain runs
through the exact finite-state engine, which makes it the reference for the
Monte Carlo estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import eigh, null_space

from fdtlab.app.config import constants
from fdtlab.app.config.tolerances import DEFAULT_TOLERANCES, Tolerances
from fdtlab.app.infra.errors import EmptyGrid, RateNegative, SimulationError
from fdtlab.app.infra.logger import get_logger
from fdtlab.app.markov.invariant import invariant_measure
from fdtlab.app.markov.norms import total_variation
from fdtlab.app.markov.semigroup import Uniformized
from fdtlab.app.markov.types import Generator, Measure, Observable, StateSpace
from fdtlab.app.perturb.family import PerturbationFamily, shift_to_nonnegative
from fdtlab.app.perturb.langevin import langevin_family
from fdtlab.app.perturb.time_change import time_change_family
from fdtlab.app.response.convergence import fit_loglog_slope
from fdtlab.app.suite.fdt import fdt_check
from fdtlab.app.suite.report import FdtReport, record
from .fourier import FourierSeries
from .model import TWO_PI, TorusModel, torus_grid

logger = get_logger(__name__)

DEFAULT_GRIDS = (64, 128, 256)


def grid_step(n_grid: int) -> float:
    return TWO_PI / n_grid


def grid_discretize(
    model: TorusModel, n_grid: int, delta: float = 0.0, *, min_grid: int = constants.MIN_GRID
) -> Generator:
    """Birth–death generator on the ring of n_grid points.

    Raises:
        SimulationError: n_grid below ``min_grid``
        RateNegative: h too coarse for the drift
    """
    if n_grid < min_grid:
        raise SimulationError(f"n_grid must be at least {min_grid}, got {n_grid}",
                              code="GRID_TOO_SMALL")
    h = grid_step(n_grid)
    b = model.drift(torus_grid(n_grid), delta)
    up = 1.0 / h**2 + b / (2.0 * h)
    down = 1.0 / h**2 - b / (2.0 * h)
    lowest = float(min(up.min(), down.min()))
    if lowest < 0:
        raise RateNegative(n_grid, lowest)
    idx = np.arange(n_grid)
    off = np.zeros((n_grid, n_grid))
    off[idx, (idx + 1) % n_grid] = up
    off[idx, (idx - 1) % n_grid] = down
    return Generator.from_offdiag(StateSpace.of_size(n_grid), off)


def sample_on_grid(series: FourierSeries, n_grid: int) -> Observable:
    return Observable(StateSpace.of_size(n_grid), series(torus_grid(n_grid)))


def gibbs_on_grid(model: TorusModel, n_grid: int, delta: float = 0.0) -> np.ndarray:
    """e^{−H + δf} at the grid points, normalized to a probability vector."""
    w = model.unnormalized_density(torus_grid(n_grid), delta)
    return w / w.sum()


def grid_kernel(model: TorusModel, n_grid: int) -> np.ndarray:
    """Central-difference A_f g = (f′ − fψe^H)·(g(x+h) − g(x−h))/(2h)."""
    h = grid_step(n_grid)
    coef = model.response_coefficient(torus_grid(n_grid)) / (2.0 * h)
    idx = np.arange(n_grid)
    A = np.zeros((n_grid, n_grid))
    A[idx, (idx + 1) % n_grid] = coef
    A[idx, (idx - 1) % n_grid] = -coef
    return A


@dataclass(frozen=True)
class GridChain:
    """Unperturbed grid chain with its invariant law and the two exact families."""

    model: TorusModel
    n_grid: int
    generator: Generator
    mu0: Measure

    @classmethod
    def build(cls, model: TorusModel, n_grid: int) -> "GridChain":
        L = grid_discretize(model, n_grid)
        return cls(model, n_grid, L, invariant_measure(L))

    @property
    def f(self) -> Observable:
        return sample_on_grid(self.model.f, self.n_grid)

    def time_change(self) -> PerturbationFamily:
        return time_change_family(self.generator, self.mu0, self.f)

    def langevin(self) -> PerturbationFamily:
        # the grid chain is reversible only up to discretization error
        return langevin_family(self.generator, self.mu0, shift_to_nonnegative(self.f))

    def kernel_static_residual(self, g: np.ndarray) -> float:
        """|⟨(A_h + fL)g⟩_{μ_h}| for the central-difference kernel A_h."""
        A = grid_kernel(self.model, self.n_grid)
        fv = self.f.values
        return abs(float(self.mu0.weights @ (A @ g + fv * (self.generator.rates @ g))))


def grid_fdt_check(
    model: TorusModel,
    n_grid: int,
    g: FourierSeries,
    s: float,
    t: float,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> FdtReport:
    """Exact FDT on the grid chain for the time-change and Langevin families,
    plus the central-difference kernel's static residual at P_{t−s}g."""
    chain = GridChain.build(model, n_grid)
    g_grid = sample_on_grid(g, n_grid)
    U = Uniformized.of(chain.generator)
    reports = [
        fdt_check(chain.generator, fam, fam.f, g_grid, s, t, tolerances, U=U)
        for fam in (chain.time_change(), chain.langevin())
    ]
    static = chain.kernel_static_residual(U.apply(t - s, g_grid))
    reports.append(FdtReport.of([
        record("grid_kernel_static", "Diffusion", static, math.inf, s=s, t=t),
    ]))
    report = FdtReport.merge_all(reports).with_params(n_grid=n_grid)
    logger.debug(
        "grid fdt check",
        extra={"extra_fields": {"n_grid": n_grid, "static": static,
                                "max_fdt": report.max_residual("fdt_check")}},
    )
    return report


@dataclass(frozen=True)
class Refinement:
    name: str
    grids: tuple[int, ...]
    errors: tuple[float, ...]
    order: float
    band: tuple[float, float]

    @property
    def steps(self) -> tuple[float, ...]:
        return tuple(grid_step(n) for n in self.grids)

    def report(self) -> FdtReport:
        lo, hi = self.band
        centre, half = (lo + hi) / 2.0, (hi - lo) / 2.0
        residual = abs(self.order - centre) if math.isfinite(self.order) else math.inf
        return FdtReport.of([
            record(self.name, "Diffusion", residual, half, grids=list(self.grids),
                   metadata={"order": self.order, "errors": list(self.errors)}),
        ])

    def rows(self) -> list[dict]:
        return [{"n_grid": n, "h": h, "error": e}
                for n, h, e in zip(self.grids, self.steps, self.errors)]


def _refine(name: str, grids: Sequence[int], error_of, band: tuple[float, float]) -> Refinement:
    grids = tuple(sorted(int(n) for n in grids))
    if not grids:
        raise EmptyGrid("n_grid")
    errors = tuple(float(error_of(n)) for n in grids)
    order = fit_loglog_slope([grid_step(n) for n in grids], errors, floor=0.0)
    logger.info(
        "grid refinement",
        extra={"extra_fields": {"name": name, "grids": list(grids), "order": order}},
    )
    return Refinement(name, grids, errors, order, band)


def tv_refinement(
    model: TorusModel,
    grids: Sequence[int] = DEFAULT_GRIDS,
    delta: float = 0.0,
) -> Refinement:
    """TV distance between the grid invariant law and the grid-sampled Gibbs law."""

    def error(n: int) -> float:
        mu = invariant_measure(grid_discretize(model, n, delta))
        return total_variation(mu.weights, gibbs_on_grid(model, n, delta))

    return _refine("grid_tv_order", grids, error, constants.TV_ORDER_BAND)


def kernel_refinement(
    model: TorusModel,
    g: FourierSeries,
    grids: Sequence[int] = DEFAULT_GRIDS,
    v: float = 0.0,
) -> Refinement:
    """Static residual of the central-difference kernel at P_v g under refinement."""

    def error(n: int) -> float:
        chain = GridChain.build(model, n)
        g_grid = sample_on_grid(g, n)
        return chain.kernel_static_residual(Uniformized.of(chain.generator).apply(v, g_grid))

    return _refine("grid_kernel_order", grids, error, constants.TV_ORDER_BAND)


def njd_ratio(model: TorusModel, n_grid: int = 256) -> float:
    """max over grid functions of ∫|ψe^H g′|²dμ⁰ / ∫|g′|²dμ⁰ (forward differences)."""
    x = torus_grid(n_grid)
    mu = gibbs_on_grid(model, n_grid)
    h = grid_step(n_grid)
    idx = np.arange(n_grid)
    D = np.zeros((n_grid, n_grid))
    D[idx, (idx + 1) % n_grid] = 1.0 / h
    D[idx, idx] = -1.0 / h
    drift_weight = mu * (model.psi * np.exp(model.H(x))) ** 2
    numerator = D.T @ (drift_weight[:, None] * D)
    denominator = D.T @ (mu[:, None] * D)
    basis = null_space(np.ones((1, n_grid)))
    values = eigh(basis.T @ numerator @ basis, basis.T @ denominator @ basis, eigvals_only=True)
    ratio = float(values[-1])
    logger.debug("njd ratio", extra={"extra_fields": {"n_grid": n_grid, "ratio": ratio}})
    return ratio
