"""CSV series for the sweep subcommands, each closed by a fitted-slope footer row."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from fdtlab.app.diffusion.grid import kernel_refinement, tv_refinement
from fdtlab.app.suite.linear_response import linear_response_check
from fdtlab.app.suite.near_equilibrium import near_equilibrium_scan
from fdtlab.app.suite.report import FdtReport

Context = Dict[str, Any]


@dataclass(frozen=True)
class SweepTable:
    name: str
    columns: tuple[str, ...]
    rows: List[Dict[str, Any]]
    footers: List[Dict[str, Any]]
    report: FdtReport = field(default_factory=FdtReport)

    def to_csv(self, path: Optional[Path] = None) -> str:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=list(self.columns), lineterminator="\n",
                                restval="")
        writer.writeheader()
        for row in self.rows + self.footers:
            writer.writerow({k: _cell(v) for k, v in row.items()})
        text = buffer.getvalue()
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
        return text


def _cell(value: Any) -> Any:
    if isinstance(value, float):
        return f"{value:.17g}"
    return value


def response_sweep(context: Context) -> SweepTable:
    """(δ, η_δ) per observable; footer: fitted log-log slope of η."""
    run, fam, tol = context["run"], context["family"], context["tolerances"]
    a, b = run.window
    rows: List[Dict[str, Any]] = []
    footers: List[Dict[str, Any]] = []
    reports = []
    for name, g in context["observables"].items():
        result = linear_response_check(fam.base, fam, g, run.response_t, context["deltas"], tol,
                                       a=a, b=b)
        rows.extend({"g": name, **row} for row in result.sweep.rows())
        footers.append({"g": name, "delta": "slope", "eta": result.sweep.slope})
        reports.append(result.report.with_params(g=name))
    return SweepTable("response_sweep", ("g", "delta", "eta", "eta_sup", "eta_l2"), rows,
                      footers, FdtReport.merge_all(reports))


def relax_scan(context: Context) -> SweepTable:
    """(s, d(s), TV) per observable and τ; footer: fitted decay rate against the gap."""
    run, fam, tol = context["run"], context["family"], context["tolerances"]
    rows: List[Dict[str, Any]] = []
    footers: List[Dict[str, Any]] = []
    reports = []
    for name, g in context["observables"].items():
        for tau in run.tau:
            scan = near_equilibrium_scan(context["nu0"], fam.base, fam, g, tau, run.s_grid, tol)
            rows.extend({"g": name, "tau": tau, **row} for row in scan.rows())
            footers.append({"g": name, "tau": tau, "s": "rate", "d": scan.rate, "tv": ""})
            footers.append({"g": name, "tau": tau, "s": "gap", "d": scan.gap, "tv": ""})
            reports.append(scan.report.with_params(g=name))
    return SweepTable("relax_scan", ("g", "tau", "s", "d", "tv"), rows, footers,
                      FdtReport.merge_all(reports))


def refinement_sweep(context: Context, grids: Optional[Sequence[int]] = None) -> SweepTable:
    """(n_grid, h, error) for the TV error and the kernel static residual;
    footer: fitted order in h."""
    run, model = context["run"], context["torus"]
    grids = list(grids or run.mc.grids)
    refinements = [tv_refinement(model, grids)]
    refinements.extend(kernel_refinement(model, g, grids) for g in context["observables"].values())
    names = ["tv"] + list(context["observables"])
    rows: List[Dict[str, Any]] = []
    footers: List[Dict[str, Any]] = []
    for label, refinement in zip(names, refinements):
        rows.extend({"quantity": label, **row} for row in refinement.rows())
        footers.append({"quantity": label, "n_grid": "slope", "error": refinement.order})
    report = refinements[0].report()
    return SweepTable("refinement", ("quantity", "n_grid", "h", "error"), rows, footers, report)
