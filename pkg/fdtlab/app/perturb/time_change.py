"""Time-change perturbation: rates e^{−δf(x)}c(x,y), kernel −f(x)c(x,y)."""

from __future__ import annotations

import numpy as np

from fdtlab.app.markov.types import Generator, Measure, Observable
from .family import FamilyKind, PerturbationFamily, ResponseKernel


def time_change_family(L: Generator, mu0: Measure, f: Observable) -> PerturbationFamily:
    """Slow down (f > 0) or speed up (f < 0) the clock at each state.

    Any real f is admissible and there is no δ cap. The response kernel is
    A_f = −fL.
    """
    c = L.offdiag
    fv = f.values

    def rates(delta: float) -> np.ndarray:
        return np.exp(-delta * fv)[:, None] * c

    kernel = ResponseKernel.from_offdiag(L.space, -fv[:, None] * c)
    return PerturbationFamily(
        kind=FamilyKind.TIME_CHANGE,
        base=L,
        mu0=mu0,
        f=f,
        kernel=kernel,
        rates_fn=rates,
        rebuild=lambda g: time_change_family(L, mu0, g),
    )
