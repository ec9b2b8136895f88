"""Monte Carlo checks of the circle diffusion against the grid chain.

Statistical verdicts are "within mc_sigma combined standard errors" (the
histogram bound is corrected for the number of bins);
standard errors come from per-path influence values so that estimates
sharing paths are combined with their correlation.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import norm

from fdtlab.app.config import constants
from fdtlab.app.config.tolerances import DEFAULT_TOLERANCES, Tolerances
from fdtlab.app.infra.errors import EmptyGrid, SimulationError
from fdtlab.app.infra.logger import get_logger
from fdtlab.app.markov.semigroup import Uniformized
from fdtlab.app.response.convergence import fit_loglog_slope
from fdtlab.app.response.function import check_times, convolution_integral
from fdtlab.app.suite.report import FdtReport, record
from .estimators import (
    EstimatorResult,
    Moments,
    covariance_influence,
    from_influence,
    mean_estimate,
    variance_estimate,
)
from .fourier import FourierSeries
from .grid import GridChain, grid_kernel, grid_step, sample_on_grid
from .model import TWO_PI, TorusModel, torus_grid
from .simulate import EnsembleParams, PathEnsemble, block_sizes, check_stability, simulate

logger = get_logger(__name__)

FAMILY = "Diffusion"
DEFAULT_DS = 0.1
DEFAULT_N_GRID = 256


def _periodic_interp(values: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Linear interpolation of grid values at arbitrary points of the circle."""
    n = values.size
    grid = np.append(torus_grid(n), TWO_PI)
    return np.interp(np.mod(x, TWO_PI), grid, np.append(values, values[0]))


def histogram_z_bound(bins: int, sigma: float) -> float:
    """Per-bin |z| bound whose union over ``bins`` bins has the tail mass of ±sigma."""
    return float(norm.isf(norm.sf(sigma) / max(1, bins)))


def stationary_histogram_check(
    model: TorusModel,
    ensemble: PathEnsemble,
    bins: int = constants.HISTOGRAM_BINS,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> FdtReport:
    """Per-bin z-scores of the terminal positions against the Gibbs law e^{−H+δf}/Z.

    The bound on max |z| is Bonferroni-corrected over the bins so that the
    whole histogram fails with the two-sided probability of one mc_sigma
    deviation.
    """
    counts, _ = np.histogram(ensemble.final, bins=bins, range=(0.0, TWO_PI))
    p = model.bin_probabilities(bins, ensemble.delta)
    n = ensemble.n_paths
    z = (counts - n * p) / np.sqrt(n * p * (1.0 - p))
    worst = float(np.max(np.abs(z)))
    bound = histogram_z_bound(bins, tolerances.mc_sigma)
    logger.debug("stationary histogram",
                 extra={"extra_fields": {"bins": bins, "max_z": worst, "bound": bound}})
    return FdtReport.of([
        record("mc_stationary_histogram", FAMILY, worst, bound, bins=bins,
               n_paths=n, T=ensemble.T, delta=ensemble.delta,
               metadata={"z": z.tolist(), "mc_sigma": tolerances.mc_sigma}),
    ])


def free_diffusion_variance(
    ensemble: PathEnsemble, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> FdtReport:
    """Var(X_T − X_0) of the unwrapped displacement against 2T."""
    est = variance_estimate(ensemble.displacement)
    expected = 2.0 * ensemble.T
    return FdtReport.of([
        record("mc_free_diffusion", FAMILY, abs(est.estimate - expected),
               tolerances.mc_sigma * est.stderr, T=ensemble.T, n_paths=ensemble.n_paths,
               metadata={**est.to_dict(), "expected": expected}),
    ])


@dataclass(frozen=True)
class McFdtResult:
    derivative: EstimatorResult
    response: EstimatorResult
    difference: EstimatorResult
    grid_value: float
    report: FdtReport


def mc_fdt_check(
    model: TorusModel,
    g: FourierSeries,
    s: float,
    t: float,
    params: EnsembleParams,
    *,
    ds: float = DEFAULT_DS,
    n_grid: int = DEFAULT_N_GRID,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> McFdtResult:
    """∂_s K_{f,g}(s,t) by a central difference of path covariances against
    ⟨A_f P_{t−s}g⟩_{μ⁰}, with P_{t−s}g taken from the grid chain and the outer
    expectation over the simulated X_s.

    Raises:
        BadTimes, SimulationError: s ± ds outside [0, t]
    """
    s, t = check_times(s, t)
    if s - ds < 0 or s + ds > t:
        raise SimulationError(f"need ds <= s <= t - ds (s={s}, t={t}, ds={ds})",
                              code="BAD_DIFFERENCE_STEP")
    run = dataclasses.replace(params, T=t, record_times=(s - ds, s, s + ds), x0=None)
    ensemble = simulate(model, 0.0, run)
    g_t = g(ensemble.final)
    k_plus, psi_plus = covariance_influence(model.f(ensemble.positions_at(s + ds)), g_t)
    k_minus, psi_minus = covariance_influence(model.f(ensemble.positions_at(s - ds)), g_t)
    lhs_influence = (psi_plus - psi_minus) / (2.0 * ds)
    derivative = from_influence((k_plus - k_minus) / (2.0 * ds), lhs_influence)

    chain = GridChain.build(model, n_grid)
    u = Uniformized.of(chain.generator).apply(t - s, sample_on_grid(g, n_grid))
    du = (np.roll(u, -1) - np.roll(u, 1)) / (2.0 * grid_step(n_grid))
    x_s = ensemble.positions_at(s)
    r = model.response_coefficient(x_s) * _periodic_interp(du, x_s)
    response = mean_estimate(r)
    grid_value = float(chain.mu0.weights @ (grid_kernel(model, n_grid) @ u))

    diff_influence = lhs_influence - (r - response.estimate)
    difference = from_influence(derivative.estimate - response.estimate, diff_influence)
    report = FdtReport.of([
        record("mc_fdt", FAMILY, abs(difference.estimate),
               tolerances.mc_sigma * difference.stderr, s=s, t=t, ds=ds,
               n_paths=params.n_paths, dt=params.dt,
               metadata={"derivative": derivative.to_dict(), "response": response.to_dict(),
                         "grid_value": grid_value}),
    ])
    logger.info(
        "mc fdt check",
        extra={"extra_fields": {"s": s, "t": t, "lhs": derivative.estimate,
                                "rhs": response.estimate, "stderr": difference.stderr,
                                "passed": report.all_passed}},
    )
    return McFdtResult(derivative, response, difference, grid_value, report)


@dataclass(frozen=True)
class ResponseSweep:
    deltas: tuple[float, ...]
    estimates: tuple[EstimatorResult, ...]
    reference: float
    intercept: EstimatorResult
    report: FdtReport

    def rows(self) -> list[dict]:
        return [
            {"delta": d, "estimate": e.estimate, "stderr": e.stderr, "reference": self.reference}
            for d, e in zip(self.deltas, self.estimates)
        ]


def grid_linear_response(model: TorusModel, g: FourierSeries, t: float,
                         n_grid: int = DEFAULT_N_GRID) -> float:
    """∫₀ᵗ ⟨A_f P_{t−u} g⟩_{μ_h} du on the grid chain."""
    chain = GridChain.build(model, n_grid)
    integral = convolution_integral(chain.generator, grid_kernel(model, n_grid),
                                    sample_on_grid(g, n_grid).values, t)
    return float(chain.mu0.weights @ integral)


def mc_response_sweep(
    model: TorusModel,
    g: FourierSeries,
    t: float,
    deltas: Sequence[float],
    params: EnsembleParams,
    *,
    n_grid: int = DEFAULT_N_GRID,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> ResponseSweep:
    """δ⁻¹(E^δ[g(X_t)] − E⁰[g(X_t)]) from a stationary start with common random
    numbers, and its δ → 0 extrapolation against the grid linear response.

    Raises:
        EmptyGrid, UnstableStep
    """
    grid = sorted({float(d) for d in deltas if d > 0})
    if not grid:
        raise EmptyGrid("delta")
    check_times(0.0, t)
    run = dataclasses.replace(params, T=t, record_times=(), x0=None)
    base = g(simulate(model, 0.0, run).final)
    samples = [(g(simulate(model, d, run).final) - base) / d for d in grid]
    estimates = tuple(mean_estimate(x) for x in samples)
    reference = grid_linear_response(model, g, t, n_grid)

    if len(grid) == 1:
        weights = np.array([1.0])
    else:
        # intercept row of the least-squares solution operator
        design = np.column_stack([np.ones(len(grid)), grid])
        weights = np.linalg.pinv(design)[0]
    intercept_values = sum(w * x for w, x in zip(weights, samples))
    intercept = mean_estimate(intercept_values)

    rows = [
        record("mc_response", FAMILY, abs(e.estimate - reference), math.inf, delta=d, t=t,
               metadata={**e.to_dict(), "reference": reference})
        for d, e in zip(grid, estimates)
    ]
    rows.append(record(
        "mc_response_linear", FAMILY, abs(intercept.estimate - reference),
        tolerances.mc_sigma * intercept.stderr, t=t, deltas=grid,
        metadata={**intercept.to_dict(), "reference": reference},
    ))
    return ResponseSweep(tuple(grid), estimates, reference, intercept, FdtReport.of(rows))


@dataclass(frozen=True)
class WeakOrderSweep:
    dts: tuple[float, ...]
    reference_dt: float
    differences: tuple[EstimatorResult, ...]
    order: float

    def report(self) -> FdtReport:
        lo, hi = constants.WEAK_ORDER_BAND
        residual = abs(self.order - (lo + hi) / 2.0) if math.isfinite(self.order) else math.inf
        return FdtReport.of([
            record("mc_weak_order", FAMILY, residual, (hi - lo) / 2.0, dts=list(self.dts),
                   metadata={"order": self.order,
                             "differences": [d.to_dict() for d in self.differences]}),
        ])

    def rows(self) -> list[dict]:
        return [{"dt": dt, "difference": d.estimate, "stderr": d.stderr}
                for dt, d in zip(self.dts, self.differences)]


def _coupled_block(
    model: TorusModel,
    g: FourierSeries,
    T: float,
    x0: float,
    factors: Sequence[int],
    ref_dt: float,
    size: int,
    seed: np.random.SeedSequence,
) -> list[Moments]:
    rng = np.random.Generator(np.random.Philox(seed))
    levels = len(factors)
    y = np.full((levels + 1, size), float(x0))
    acc = np.zeros((levels, size))
    n_ref = int(round(T / ref_dt))
    root = math.sqrt(ref_dt)
    for k in range(1, n_ref + 1):
        dw = root * rng.standard_normal(size)
        y[-1] += model.drift(y[-1]) * ref_dt + math.sqrt(2.0) * dw
        acc += dw
        for j, m in enumerate(factors):
            if k % m == 0:
                y[j] += model.drift(y[j]) * (m * ref_dt) + math.sqrt(2.0) * acc[j]
                acc[j] = 0.0
    g_ref = g(y[-1])
    return [Moments.of(g(y[j]) - g_ref) for j in range(levels)]


def weak_order_sweep(
    model: TorusModel,
    g: FourierSeries,
    T: float,
    dts: Sequence[float],
    params: EnsembleParams,
    *,
    x0: float = 1.0,
    refine: int = 8,
) -> WeakOrderSweep:
    """E[g(X_T)] − E_ref[g(X_T)] per dt from x0, all levels driven by one
    Brownian path sampled at min(dts)/refine.

    Raises:
        EmptyGrid, UnstableStep, SimulationError: a dt not commensurate with the reference
    """
    steps = sorted({float(dt) for dt in dts}, reverse=True)
    if not steps:
        raise EmptyGrid("dt")
    check_stability(model, 0.0, steps[0])
    ref_dt = steps[-1] / refine
    factors = []
    for dt in steps:
        m = int(round(dt / ref_dt))
        if abs(m * ref_dt - dt) > 1e-9 * dt or abs(T / dt - round(T / dt)) > 1e-9 * T / dt:
            raise SimulationError(f"dt={dt} is not commensurate with T={T} and {ref_dt}",
                                  code="OFF_GRID")
        factors.append(m)

    sizes = block_sizes(params.n_paths, params.resolved_block_paths())
    seeds = np.random.SeedSequence(params.seed).spawn(len(sizes))
    with ThreadPoolExecutor(max_workers=params.resolved_threads()) as pool:
        blocks = list(pool.map(
            lambda item: _coupled_block(model, g, T, x0, factors, ref_dt, item[0], item[1]),
            zip(sizes, seeds),
        ))
    differences = tuple(
        Moments.merge_all(block[j] for block in blocks).result() for j in range(len(steps))
    )
    order = fit_loglog_slope(steps, [abs(d.estimate) for d in differences], floor=0.0)
    logger.info(
        "weak order sweep",
        extra={"extra_fields": {"dts": steps, "reference_dt": ref_dt, "order": order}},
    )
    return WeakOrderSweep(tuple(steps), ref_dt, differences, order)

