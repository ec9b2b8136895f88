"""Phase 3: Validate deltas."""

from __future__ import annotations

from typing import Any, Dict

from fdtlab.app.config.getter import get_numerics_config
from fdtlab.app.diffusion.simulate import check_stability
from fdtlab.app.infra.errors import EmptyGrid, SimulationError
from fdtlab.app.response.convergence import dyadic_deltas


def execute(context: Dict[str, Any]) -> None:
    """Check every δ of the run against the family cap before any computation (Phase 3).

    Raises:
        DeltaTooLarge, EmptyGrid, UnstableStep
    """
    run = context["run"]
    if "family" in context:
        if run.deltas is not None:
            deltas = [float(d) for d in run.deltas]
        else:
            lo, hi = get_numerics_config(context["config"])["delta_exponents"]
            deltas = dyadic_deltas(lo, hi)
        if not deltas:
            raise EmptyGrid("delta")
        for delta in deltas:
            context["family"].check_delta(delta)
        context["deltas"] = deltas
        return

    model = context["torus"]
    deltas = [float(d) for d in run.mc.deltas]
    if not deltas:
        raise EmptyGrid("delta")
    for delta in deltas:
        if delta <= 0:
            raise SimulationError(f"mc deltas must be positive, got {delta}",
                                  code="NEGATIVE_DELTA")
        check_stability(model, delta, run.mc.dt)
    context["deltas"] = deltas
