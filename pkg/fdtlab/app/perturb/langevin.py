"""Langevin perturbation of a jump chain.

rates  c₁^{δf}(x,y) = ½(e^{δ(f(y)−f(x))} + e^{−δf(x)}) c(x,y) + ½(1 − e^{−δf(x)}) c*(x,y)
kernel a₁(x,y)      = −f(x)c(x,y) + ½f(y)c(x,y) + ½f(x)c*(x,y)

For a reversible base c* = c and A_f = ½Γ(f, ·). Otherwise the direction
must be nonnegative for the rates to stay nonnegative.
"""

from __future__ import annotations

import numpy as np

from fdtlab.app.config import constants
from fdtlab.app.infra.errors import NegativeDirection
from fdtlab.app.markov.adjoint import adjoint, is_reversible
from fdtlab.app.markov.carre import carre_du_champ_values
from fdtlab.app.markov.types import Generator, Measure, Observable, Vector, values_of
from .family import FamilyKind, PerturbationFamily, ResponseKernel


def _require_nonnegative(f: Observable, reversible: bool) -> None:
    if not reversible and float(f.values.min()) < 0:
        raise NegativeDirection(float(f.values.min()))


def langevin_family(L: Generator, mu0: Measure, f: Observable) -> PerturbationFamily:
    """Langevin family over (L, μ⁰).

    Raises:
        NegativeDirection: non-reversible base and min f < 0
        NotInvariant: μ⁰ is not invariant for L
    """
    reversible, _ = is_reversible(L, mu0, constants.SYMMETRY_TOL)
    _require_nonnegative(f, reversible)
    c = L.offdiag
    c_star = c if reversible else adjoint(L, mu0).offdiag
    fv = f.values
    df = fv[None, :] - fv[:, None]

    def rates(delta: float) -> np.ndarray:
        decay = np.exp(-delta * fv)[:, None]
        return 0.5 * (np.exp(delta * df) + decay) * c + 0.5 * (1.0 - decay) * c_star

    kernel_off = -fv[:, None] * c + 0.5 * fv[None, :] * c + 0.5 * fv[:, None] * c_star
    return PerturbationFamily(
        kind=FamilyKind.LANGEVIN,
        base=L,
        mu0=mu0,
        f=f,
        kernel=ResponseKernel.from_offdiag(L.space, kernel_off),
        rates_fn=rates,
        symmetric=reversible,
        rebuild=lambda g: langevin_family(L, mu0, g),
        params={"reversible_base": reversible},
    )


def symmetric_tilt_generator(L: Generator, mu0: Measure, f: Observable) -> Generator:
    """The μᶠ-symmetric part of the Langevin construction.

    rates (1 − e^{−f(x)}) c̃(x,y) + ½(e^{f(y)−f(x)} − 1) c(x,y), i.e.
    g ↦ (1 − e^{−f}) L̃ g + ½ e^{−f} Γ(e^f, g). Nonnegative for f ≥ 0; as
    f is scaled to zero this generator vanishes, which is why the Langevin
    family adds e^{−f}L to it.

    Raises:
        NegativeDirection: min f < 0
    """
    if float(f.values.min()) < 0:
        raise NegativeDirection(float(f.values.min()))
    c = L.offdiag
    c_tilde = 0.5 * (c + adjoint(L, mu0).offdiag)
    fv = f.values
    off = (1.0 - np.exp(-fv))[:, None] * c_tilde + 0.5 * (
        np.exp(fv[None, :] - fv[:, None]) - 1.0
    ) * c
    return Generator.from_offdiag(L.space, off, clip=1e-13 * max(1.0, float(np.max(c))))


def langevin_symmetric_action(L: Generator, f: Vector, g: Vector) -> np.ndarray:
    """L g + ½ e^{−f} Γ(e^f, g); equals L₁^f g when L is reversible."""
    fv = values_of(f)
    return L.apply(g) + 0.5 * np.exp(-fv) * carre_du_champ_values(L, np.exp(fv), g)
