"""Finite-difference responses δ⁻¹(P_t^{δf} − P_t)ĝ against the linear response."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fdtlab.app.infra.errors import PerturbationError
from fdtlab.app.infra.logger import get_logger
from fdtlab.app.markov.norms import l2_norm, sup_norm
from fdtlab.app.markov.semigroup import Uniformized
from fdtlab.app.markov.types import Generator, Vector, values_of
from fdtlab.app.perturb.family import FamilyKind, PerturbationFamily
from .function import check_times, convolution_integral

logger = get_logger(__name__)


def family_norm(fam: PerturbationFamily) -> str:
    """Norm in which the linear-response limit is asserted for this family."""
    return "l2" if fam.kind is FamilyKind.LANGEVIN else "sup"


@dataclass(frozen=True, eq=False)
class FiniteDifferenceResult:
    values: np.ndarray
    reference: np.ndarray
    eta_sup: float
    eta_l2: float
    norm: str

    @property
    def eta(self) -> float:
        return self.eta_l2 if self.norm == "l2" else self.eta_sup


def _eta(diff: np.ndarray, ref: np.ndarray, weights: np.ndarray, t: float) -> tuple[float, float]:
    if t == 0:
        return 0.0, 0.0
    err = diff - ref
    return sup_norm(err) / t, l2_norm(err, weights) / t


def windowed_response_check(
    L: Generator,
    fam: PerturbationFamily,
    g: Vector,
    a: float,
    b: float,
    t: float,
    delta: float,
) -> FiniteDifferenceResult:
    """Perturb only during [a, a+t] and observe at a+t+b.

    Compares δ⁻¹P_a(P_t^{δf} − P_t)P_b g with ∫_a^{a+t} R(u, a+t+b) du,
    which equals P_a ∫₀ᵗ P_s A_f P_{t−s}(P_b g) ds. The residual is per unit t.

    Raises:
        BadTimes: a negative time
        DeltaTooLarge: δ beyond the family cap
    """
    check_times(0.0, a)
    check_times(0.0, b)
    check_times(0.0, t)
    delta = fam.check_delta(delta)
    if delta == 0:
        raise PerturbationError("finite differences need δ > 0", code="ZERO_DELTA")
    U = Uniformized.of(L)
    U_delta = Uniformized.of(fam.generator_at(delta))
    g_b = U.apply(b, g)
    diff = U.apply(a, (U_delta.apply(t, g_b) - U.apply(t, g_b)) / delta)
    ref = U.apply(a, convolution_integral(L, fam.kernel.matrix, g_b, t))
    eta_sup, eta_l2 = _eta(diff, ref, fam.mu0.weights, t)
    logger.debug(
        "finite difference response",
        extra={"extra_fields": {
            "kind": fam.kind.value, "delta": delta, "t": t, "a": a, "b": b,
            "eta_sup": eta_sup, "eta_l2": eta_l2,
        }},
    )
    return FiniteDifferenceResult(diff, ref, eta_sup, eta_l2, family_norm(fam))


def finite_difference_response(
    L: Generator, fam: PerturbationFamily, g_hat: Vector, t: float, delta: float
) -> FiniteDifferenceResult:
    """δ⁻¹(P_t^{δf} − P_t)ĝ and η = ‖difference − ∫₀ᵗ P_s A_f P_{t−s}ĝ ds‖ / t."""
    return windowed_response_check(L, fam, values_of(g_hat), 0.0, 0.0, t, delta)
