"""Randomized equilibrium FDT battery over chains, family kinds and observables."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from fdtlab.app.config.getter import get_runtime_config
from fdtlab.app.config.tolerances import DEFAULT_TOLERANCES, Tolerances
from fdtlab.app.infra.logger import get_logger
from fdtlab.app.markov.semigroup import Uniformized
from fdtlab.app.markov.types import Observable
from fdtlab.app.perturb.builders import random_family, random_observable
from fdtlab.app.perturb.family import (
    FamilyKind,
    PerturbationFamily,
    corrupt_kernel,
    shift_to_nonnegative,
)
from fdtlab.app.perturb.verify import kernel_row_sum_residual
from .fdt import fdt_check, static_identity_check
from .report import FdtReport, record

logger = get_logger(__name__)

BATTERY_KINDS = tuple(FamilyKind)
BATTERY_TIMES: tuple[tuple[float, float], ...] = ((0.1, 1.0), (0.5, 2.0), (1.0, 1.5))
BATTERY_V_GRID: tuple[float, ...] = (0.0, 0.3, 1.0)
HOMOGENEITY_FACTORS: tuple[float, ...] = (0.5, 2.0, 7.0)
MIN_STATES = 2
MAX_STATES = 16


@dataclass(frozen=True)
class KernelFault:
    """Shift of one off-diagonal kernel entry, for sensitivity runs."""

    x: int
    y: int
    eps: float = 1e-3

    def apply(self, fam: PerturbationFamily) -> Optional[PerturbationFamily]:
        x, y = self.x % fam.n, self.y % fam.n
        if x == y:
            return None
        return corrupt_kernel(fam, x, y, self.eps)


def homogeneity_report(
    fam: PerturbationFamily,
    factors: Iterable[float] = HOMOGENEITY_FACTORS,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    **params,
) -> FdtReport:
    """A_f𝟙 = 0 and A_{rf} = rA_f for r > 0."""
    family = fam.kind.value
    A = fam.kernel.matrix
    scale = max(1.0, float(np.max(np.abs(A))))
    rows = [record("kernel_row_sum", family, kernel_row_sum_residual(fam),
                   tolerances.kernel_row_sum * scale, **params)]
    for r in factors:
        scaled = fam.scaled(r).kernel.matrix
        rows.append(record(
            "kernel_homogeneity", family, float(np.max(np.abs(scaled - r * A))),
            tolerances.homogeneity * max(1.0, r * scale), r=r, **params,
        ))
    return FdtReport.of(rows)


def battery_case(
    fam: PerturbationFamily,
    g: Observable,
    times: Sequence[tuple[float, float]] = BATTERY_TIMES,
    v_grid: Sequence[float] = BATTERY_V_GRID,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    **params,
) -> FdtReport:
    """fdt_check over the (s, t) grid plus the static identity over the v grid."""
    L = fam.base
    U = Uniformized.of(L)
    reports = [fdt_check(L, fam, fam.f, g, s, t, tolerances, U=U) for s, t in times]
    reports.append(static_identity_check(L, fam, g, tuple(v_grid), tolerances, U=U))
    return FdtReport.merge_all(reports).with_params(**params)


def _direction(rng: np.random.Generator, kind: FamilyKind, fam: PerturbationFamily) -> Observable:
    f = random_observable(rng, fam.space)
    if kind is FamilyKind.LANGEVIN:
        return shift_to_nonnegative(f)
    return f


def run_chain(
    chain: int,
    seed: np.random.SeedSequence,
    kinds: Sequence[FamilyKind],
    pairs: int,
    times: Sequence[tuple[float, float]],
    v_grid: Sequence[float],
    tolerances: Tolerances,
    fault: Optional[KernelFault] = None,
) -> FdtReport:
    """All kinds and (f, g) pairs on one random chain size drawn from ``seed``."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(MIN_STATES, MAX_STATES + 1))
    reports = []
    for kind in kinds:
        template = random_family(rng, kind, n)
        for pair in range(pairs):
            fam = template.rebuild(_direction(rng, kind, template)) if template.rebuild else template
            g = random_observable(rng, fam.space)
            if pair == 0:
                reports.append(homogeneity_report(fam, tolerances=tolerances, chain=chain))
            if fault is not None:
                corrupted = fault.apply(fam)
                if corrupted is None:
                    continue
                fam = corrupted
            reports.append(battery_case(fam, g, times, v_grid, tolerances,
                                        chain=chain, pair=pair))
    return FdtReport.merge_all(reports)


def run_battery(
    seed: int,
    n_chains: int = 50,
    kinds: Optional[Iterable["FamilyKind | str"]] = None,
    pairs: int = 5,
    times: Sequence[tuple[float, float]] = BATTERY_TIMES,
    v_grid: Sequence[float] = BATTERY_V_GRID,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    *,
    threads: Optional[int] = None,
    fault: Optional[KernelFault] = None,
) -> FdtReport:
    """Equilibrium FDT, static identity and kernel axioms on random chains.

    Chains are seeded from one SeedSequence and run on a thread pool capped by
    the runtime ``threads`` setting; the merged report is independent of the
    completion order.
    """
    kind_list = [FamilyKind.parse(k) for k in (kinds or BATTERY_KINDS)]
    workers = max(1, int(threads or get_runtime_config()["threads"]))
    children = np.random.SeedSequence(seed).spawn(n_chains)
    started = time.time()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        reports = list(pool.map(
            lambda item: run_chain(item[0], item[1], kind_list, pairs, times, v_grid,
                                   tolerances, fault),
            enumerate(children),
        ))
    report = FdtReport.merge_all(reports)
    logger.info(
        "battery completed",
        extra={"extra_fields": {
            "chains": n_chains, "kinds": [k.value for k in kind_list], "rows": len(report),
            "failures": len(report.failures), "workers": workers,
            "elapsed_seconds": round(time.time() - started, 3),
        }},
    )
    return report
