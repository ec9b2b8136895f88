"""Batch validation of a family over a δ grid."""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from fdtlab.app.config.tolerances import DEFAULT_TOLERANCES, Tolerances
from fdtlab.app.infra.errors import EmptyGrid, FDTLabError
from fdtlab.app.infra.logger import get_logger
from fdtlab.app.markov.adjoint import reversibility_residual
from fdtlab.app.markov.invariant import invariance_residual
from fdtlab.app.suite.report import FdtReport, record
from .family import PerturbationFamily

logger = get_logger(__name__)


def kernel_row_sum_residual(fam: PerturbationFamily) -> float:
    """‖A_f 𝟙‖_∞."""
    return float(np.max(np.abs(fam.kernel.apply(np.ones(fam.n)))))


def verify_family(
    fam: PerturbationFamily,
    delta_grid: Iterable[float],
    tolerances: Optional[Tolerances] = None,
) -> FdtReport:
    """Generator validity, μ^{δf}-invariance and (for reversible families) symmetry per δ.

    Raises:
        EmptyGrid: no δ given
        DeltaTooLarge: a δ outside the family's cap
    """
    tol = tolerances or DEFAULT_TOLERANCES
    deltas = [float(d) for d in delta_grid]
    if not deltas:
        raise EmptyGrid("delta")
    for delta in deltas:
        fam.check_delta(delta)

    family = fam.kind.value
    rows = [
        record(
            "kernel_row_sum",
            family,
            kernel_row_sum_residual(fam),
            tol.kernel_row_sum * max(1.0, float(np.max(np.abs(fam.kernel.matrix)))),
        )
    ]
    for delta in deltas:
        try:
            L_delta = fam.generator_at(delta)
        except FDTLabError as exc:
            rows.append(record(
                "generator_valid", family, np.inf, 0.0, delta=delta,
                metadata={"error": exc.code},
            ))
            continue
        rows.append(record("generator_valid", family, 0.0, 0.0, delta=delta))
        weights = fam.perturbed_measure(delta).weights
        rows.append(record(
            "family_invariance",
            family,
            invariance_residual(L_delta, weights),
            tol.family_invariance,
            delta=delta,
        ))
        if fam.symmetric:
            rows.append(record(
                "family_reversibility",
                family,
                reversibility_residual(L_delta, weights),
                tol.symmetry,
                delta=delta,
            ))
    report = FdtReport.of(rows)
    logger.debug(
        "verified family",
        extra={"extra_fields": {"kind": family, "deltas": len(deltas), "passed": report.all_passed}},
    )
    return report
