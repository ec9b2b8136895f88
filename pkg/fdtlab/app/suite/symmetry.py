"""μ⁰-symmetry of B_f = A_f + fL for families of reversible generators."""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from fdtlab.app.config.tolerances import DEFAULT_TOLERANCES, Tolerances
from fdtlab.app.infra.errors import NotSymmetricFamily
from fdtlab.app.infra.logger import get_logger
from fdtlab.app.markov.adjoint import reversibility_residual
from fdtlab.app.markov.types import Vector
from fdtlab.app.perturb.family import PerturbationFamily
from .fdt import require_direction
from .report import FdtReport, record

logger = get_logger(__name__)

PRECONDITION_DELTAS = (0.05, 0.1)


def b_operator(fam: PerturbationFamily) -> np.ndarray:
    """Matrix of g ↦ A_f g + f∘Lg."""
    return fam.kernel.matrix + fam.f.values[:, None] * fam.base.rates


def b_symmetry_residual(fam: PerturbationFamily) -> float:
    """max |μ⁰(x)B(x,y) − μ⁰(y)B(y,x)| with μ⁰ normalized."""
    mu = fam.mu0.normalize().weights
    weighted = mu[:, None] * b_operator(fam)
    return float(np.max(np.abs(weighted - weighted.T)))


def family_symmetry_defect(fam: PerturbationFamily, deltas: Iterable[float]) -> float:
    """Largest μ^{δf}-reversibility residual of L^{δf} over the admissible δ."""
    worst = 0.0
    for delta in deltas:
        if delta > fam.delta_cap:
            continue
        L_delta = fam.generator_at(delta)
        weights = fam.perturbed_measure(delta).weights
        worst = max(worst, reversibility_residual(L_delta, weights / weights.sum()))
    return worst


def b_symmetry_check(
    fam: PerturbationFamily,
    f: Optional[Vector] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    *,
    deltas: Iterable[float] = PRECONDITION_DELTAS,
    strict: bool = False,
) -> FdtReport:
    """``b_symmetry`` row plus a ``b_symmetry_precondition`` row.

    The precondition row carries the μ^{δf}-symmetry defect of the perturbed
    generators; a family whose generators are not reversible has no reason
    for B_f to be symmetric, and in strict mode this raises.

    Raises:
        NotSymmetricFamily: strict mode and the precondition fails
        DirectionMismatch
    """
    require_direction(fam, f)
    defect = family_symmetry_defect(fam, deltas)
    if strict and defect > tolerances.symmetry:
        raise NotSymmetricFamily(defect, tolerances.symmetry)
    residual = b_symmetry_residual(fam)
    family = fam.kind.value
    logger.debug(
        "b symmetry",
        extra={"extra_fields": {"kind": family, "n": fam.n, "residual": residual,
                                "precondition": defect}},
    )
    return FdtReport.of([
        record("b_symmetry_precondition", family, defect, tolerances.symmetry, n=fam.n),
        record("b_symmetry", family, residual, tolerances.b_symmetry, n=fam.n),
    ])
