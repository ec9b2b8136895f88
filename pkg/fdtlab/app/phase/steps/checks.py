"""Phase 4: Checks.

Each named check maps the run context to an FdtReport. Checks run on a
thread pool capped by the runtime ``threads`` setting and their reports are
merged order-independently.
"""

from __future__ import annotations

import dataclasses
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence

from fdtlab.app.diffusion.grid import grid_fdt_check, njd_ratio, tv_refinement
from fdtlab.app.diffusion.mc_check import (
    FAMILY as DIFFUSION,
    free_diffusion_variance,
    mc_fdt_check,
    mc_response_sweep,
    stationary_histogram_check,
    weak_order_sweep,
)
from fdtlab.app.diffusion.paths_io import write_paths_binary
from fdtlab.app.diffusion.simulate import EnsembleParams, simulate
from fdtlab.app.infra.errors import FDTLabError, ValidationError
from fdtlab.app.infra.logger import get_logger, log_exception
from fdtlab.app.markov.adjoint import is_reversible
from fdtlab.app.suite.battery import battery_case, homogeneity_report
from fdtlab.app.suite.covariance import DerivativeMode, covariance_s_derivative
from fdtlab.app.suite.fdt import lemma_consistency
from fdtlab.app.suite.green_kubo import green_kubo, green_kubo_dissipation
from fdtlab.app.suite.linear_response import linear_response_check
from fdtlab.app.suite.near_equilibrium import near_equilibrium_scan
from fdtlab.app.suite.report import FdtReport, record
from fdtlab.app.suite.symmetry import b_symmetry_check

logger = get_logger(__name__)

Context = Dict[str, Any]


@dataclass(frozen=True)
class Check:
    name: str
    run: Callable[[Context], FdtReport]
    applies: Callable[[Context], bool] = lambda context: True
    default: bool = True


# finite-state checks

def _mu0(context: Context):
    return context["family"].mu0.normalize().weights


def _fdt(context: Context) -> FdtReport:
    run, fam, tol = context["run"], context["family"], context["tolerances"]
    reports = [
        battery_case(fam, g, [tuple(p) for p in run.times], run.v_grid, tol)
        .with_params(g=name)
        for name, g in context["observables"].items()
    ]
    clean = context["clean_family"]
    if clean.rebuild is not None:
        reports.append(homogeneity_report(clean, tolerances=tol))
    return FdtReport.merge_all(reports)


def _lemma(context: Context) -> FdtReport:
    run, fam, tol = context["run"], context["family"], context["tolerances"]
    family = fam.kind.value
    reports = []
    for measure, nu in (("mu0", _mu0(context)), ("nu0", context["nu0"])):
        for name, g in context["observables"].items():
            for s, t in run.times:
                reports.append(
                    lemma_consistency(nu, fam.base, fam.f, g, s, t, tol, family=family)
                    .with_params(g=name, measure=measure)
                )
    return FdtReport.merge_all(reports)


def _response(context: Context) -> FdtReport:
    run, fam, tol = context["run"], context["family"], context["tolerances"]
    a, b = run.window
    return FdtReport.merge_all(
        linear_response_check(fam.base, fam, g, run.response_t, context["deltas"], tol,
                              a=a, b=b).report.with_params(g=name)
        for name, g in context["observables"].items()
    )


def _near_equilibrium(context: Context) -> FdtReport:
    run, fam, tol = context["run"], context["family"], context["tolerances"]
    return FdtReport.merge_all(
        near_equilibrium_scan(context["nu0"], fam.base, fam, g, tau, run.s_grid, tol)
        .report.with_params(g=name)
        for name, g in context["observables"].items()
        for tau in run.tau
    )


def _is_reversible(context: Context) -> bool:
    fam = context["family"]
    return is_reversible(fam.base, fam.mu0, context["tolerances"].symmetry)[0]


def _green_kubo(context: Context) -> FdtReport:
    run, fam, tol = context["run"], context["family"], context["tolerances"]
    mu = _mu0(context)
    family = fam.kind.value
    reports = []
    for name, g in context["observables"].items():
        reports.append(green_kubo(fam.base, mu, fam.f, g, None, tol).report(tol, family, g=name))
        rows = []
        for s, t in run.times:
            value = green_kubo_dissipation(fam.base, mu, fam.f, g, s, t, tolerances=tol)
            reference = covariance_s_derivative(mu, fam.base, fam.f, g, s, t,
                                                DerivativeMode.GENERAL, tolerances=tol)
            rows.append(record(
                "green_kubo_dissipation", family, abs(value - reference),
                tol.green_kubo_rel * max(1.0, abs(reference)), g=name, s=s, t=t,
                metadata={"integral": value, "derivative": reference},
            ))
        reports.append(FdtReport.of(rows))
    return FdtReport.merge_all(reports)


def _b_symmetry(context: Context) -> FdtReport:
    return b_symmetry_check(context["family"], None, context["tolerances"])


# diffusion checks

def _ensemble_params(context: Context, **changes: Any) -> EnsembleParams:
    mc = context["run"].mc
    params = EnsembleParams(n_paths=mc.n_paths, dt=mc.dt, T=mc.T,
                            seed=context["runtime"]["seed"], stride=mc.stride)
    return dataclasses.replace(params, **changes) if changes else params


def _grid_fdt(context: Context) -> FdtReport:
    run, model, tol = context["run"], context["torus"], context["tolerances"]
    return FdtReport.merge_all(
        grid_fdt_check(model, n, g, s, t, tol).with_params(g=name)
        for n in run.mc.grids
        for s, t in run.times
        for name, g in context["observables"].items()
    )


def _grid_order(context: Context) -> FdtReport:
    run, model = context["run"], context["torus"]
    ratio = njd_ratio(model, run.mc.n_grid)
    return tv_refinement(model, run.mc.grids).report().merge(FdtReport.of([
        record("njd_ratio", DIFFUSION, ratio, float("inf"), n_grid=run.mc.n_grid),
    ]))


def _mc_stationary(context: Context) -> FdtReport:
    run, model, tol = context["run"], context["torus"], context["tolerances"]
    ensemble = simulate(model, 0.0, _ensemble_params(context))
    reports = [stationary_histogram_check(model, ensemble, run.mc.bins, tol)]
    if model.H.is_constant:
        reports.append(free_diffusion_variance(ensemble, tol))
    if run.mc.paths_out and ensemble.paths is not None:
        write_paths_binary(context["out_dir"] / run.mc.paths_out, ensemble)
    return FdtReport.merge_all(reports)


def _mc_fdt(context: Context) -> FdtReport:
    mc, model, tol = context["run"].mc, context["torus"], context["tolerances"]
    params = _ensemble_params(context)
    return FdtReport.merge_all(
        mc_fdt_check(model, g, mc.s, mc.t, params, ds=mc.ds, n_grid=mc.n_grid,
                     tolerances=tol).report.with_params(g=name)
        for name, g in context["observables"].items()
    )


def _mc_response(context: Context) -> FdtReport:
    mc, model, tol = context["run"].mc, context["torus"], context["tolerances"]
    params = _ensemble_params(context)
    return FdtReport.merge_all(
        mc_response_sweep(model, g, mc.t, context["deltas"], params, n_grid=mc.n_grid,
                          tolerances=tol).report.with_params(g=name)
        for name, g in context["observables"].items()
    )


def _weak_order(context: Context) -> FdtReport:
    mc, model = context["run"].mc, context["torus"]
    params = _ensemble_params(context, n_paths=mc.weak_paths, stride=None)
    # horizon mc.t so that every dt of the sweep divides it
    return FdtReport.merge_all(
        weak_order_sweep(model, g, mc.t, mc.weak_dts, params).report().with_params(g=name)
        for name, g in context["observables"].items()
    )


FINITE_CHECKS: Dict[str, Check] = {c.name: c for c in (
    Check("fdt", _fdt),
    Check("lemma", _lemma),
    Check("response", _response),
    Check("near_equilibrium", _near_equilibrium),
    Check("green_kubo", _green_kubo, applies=_is_reversible),
    Check("b_symmetry", _b_symmetry, applies=lambda context: context["family"].symmetric),
)}

TORUS_CHECKS: Dict[str, Check] = {c.name: c for c in (
    Check("grid_fdt", _grid_fdt),
    Check("grid_order", _grid_order),
    Check("mc_stationary", _mc_stationary, default=False),
    Check("mc_fdt", _mc_fdt, default=False),
    Check("mc_response", _mc_response, default=False),
    Check("weak_order", _weak_order, default=False),
)}


def select_checks(context: Context, requested: Optional[Sequence[str]] = None) -> List[Check]:
    """Requested checks by name, or every default check that applies.

    Raises:
        ValidationError: unknown check name
    """
    registry = FINITE_CHECKS if "family" in context else TORUS_CHECKS
    if requested:
        unknown = [name for name in requested if name not in registry]
        if unknown:
            raise ValidationError(
                f"unknown checks {unknown}",
                details={"known": sorted(registry)},
            )
        return [registry[name] for name in dict.fromkeys(requested)]
    selected = []
    for check in registry.values():
        if not check.default:
            continue
        if check.applies(context):
            selected.append(check)
        else:
            logger.info("check skipped", extra={"extra_fields": {"check": check.name}})
    return selected


def _run_check(check: Check, context: Context) -> FdtReport:
    started = time.time()
    try:
        report = check.run(context)
    except FDTLabError as exc:
        exc.details.setdefault("check", check.name)
        log_exception(logger, f"Check {check.name} failed", exc, check=check.name)
        raise
    logger.info(f"Check {check.name} completed", extra={"extra_fields": {
        "check": check.name,
        "rows": len(report),
        "failures": len(report.failures),
        "elapsed_seconds": round(time.time() - started, 3),
    }})
    return report


def execute(context: Context) -> None:
    """Run the selected checks and merge their reports (Phase 4)."""
    requested = context.get("checks") or context["run"].checks
    checks = select_checks(context, requested)
    workers = max(1, int(context["runtime"]["threads"]))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        reports = list(pool.map(lambda check: _run_check(check, context), checks))
    context["checks_run"] = [c.name for c in checks]
    context["report"] = FdtReport.merge_all(reports)
