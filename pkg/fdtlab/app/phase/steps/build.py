"""Phase 2: Build."""

from __future__ import annotations

from typing import Any, Dict

import numpy as np

from fdtlab.app.config.getter import get_numerics_config
from fdtlab.app.diffusion.fourier import FourierSeries
from fdtlab.app.infra.errors import ValidationError
from fdtlab.app.infra.logger import get_logger
from fdtlab.app.markov.types import Observable
from fdtlab.app.models.bundle import ModelBundle, build_family
from fdtlab.app.suite.battery import KernelFault

logger = get_logger(__name__)


def _finite_observable(bundle: ModelBundle, name: str) -> Observable:
    value = bundle.observable(name)
    if not isinstance(value, Observable):
        raise ValidationError(f"observable '{name}' is not a state vector")
    return value


def _initial(bundle: ModelBundle, name: str | None) -> np.ndarray:
    """ν₀ from a named nonnegative observable, or the point mass at the first state."""
    assert bundle.space is not None
    if name is None:
        nu = np.zeros(bundle.space.n)
        nu[0] = 1.0
        return nu
    weights = _finite_observable(bundle, name).values
    if weights.min() < 0 or weights.sum() <= 0:
        raise ValidationError(f"initial '{name}' must be nonnegative with positive mass")
    return weights / weights.sum()


def _build_finite(context: Dict[str, Any], bundle: ModelBundle) -> None:
    run = context["run"]
    assert bundle.space is not None
    cap = get_numerics_config(context["config"])["dense_size_cap"]
    if bundle.space.n > cap:
        raise ValidationError(f"model has {bundle.space.n} states, above dense_size_cap {cap}")

    f = _finite_observable(bundle, run.f)
    family = build_family(bundle, run.family, f, variant=run.variant, b=run.b)
    context["clean_family"] = family
    if run.kernel_override is not None:
        fault = KernelFault(bundle.space.index(run.kernel_override.x),
                            bundle.space.index(run.kernel_override.y),
                            run.kernel_override.eps)
        corrupted = fault.apply(family)
        if corrupted is None:
            raise ValidationError("kernel_override must name an off-diagonal entry")
        family = corrupted
        logger.warning("kernel override active", extra={"extra_fields": {
            "x": fault.x, "y": fault.y, "eps": fault.eps,
        }})
    context["family"] = family
    context["observables"] = {name: _finite_observable(bundle, name) for name in run.g}
    context["nu0"] = _initial(bundle, run.initial)


def _build_torus(context: Dict[str, Any], bundle: ModelBundle) -> None:
    run = context["run"]
    context["torus"] = bundle.require_torus("diffusion checks")
    observables = {}
    for name in run.g:
        value = bundle.observable(name)
        if not isinstance(value, FourierSeries):
            raise ValidationError(f"observable '{name}' is not a Fourier series")
        observables[name] = value
    context["observables"] = observables


def execute(context: Dict[str, Any]) -> None:
    """Build the family (finite models) or the circle model (torus) and the observables (Phase 2)."""
    bundle: ModelBundle = context["bundle"]
    if bundle.is_finite:
        _build_finite(context, bundle)
    else:
        _build_torus(context, bundle)
