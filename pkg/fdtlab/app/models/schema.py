"""Model documents and run configs.

A model document is one JSON object discriminated by ``kind``:

    rates        states + [{from, to, rate}]
    hamiltonian  states + edges + H (Metropolis or Glauber dynamics)
    cycles       states + [{states, alpha, beta}] + optional mu0
    torus        Fourier H, psi, f for the circle diffusion

``observables`` maps names to value lists (finite models) or Fourier
coefficients (torus).
"""

from __future__ import annotations

from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

StateRef = Union[int, str]


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True, frozen=True)


class RateSpec(_Document):
    from_: StateRef = Field(alias="from")
    to: StateRef
    rate: float = Field(ge=0, allow_inf_nan=False)


class CycleSpec(_Document):
    states: List[StateRef] = Field(min_length=1)
    alpha: float = Field(ge=0, allow_inf_nan=False)
    beta: float = Field(default=0.0, allow_inf_nan=False)


class FourierSpec(_Document):
    """f(x) = a0 + Σ_k cos[k−1]·cos(kx) + sin[k−1]·sin(kx)."""

    a0: float = 0.0
    cos: List[float] = Field(default_factory=list)
    sin: List[float] = Field(default_factory=list)


class _FiniteModel(_Document):
    name: Optional[str] = None
    description: Optional[str] = None
    states: List[StateRef] = Field(min_length=2)
    observables: Dict[str, List[float]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_states(self):
        labels = [str(s) for s in self.states]
        if len(set(labels)) != len(labels):
            raise ValueError("states must be unique")
        for name, values in self.observables.items():
            if len(values) != len(labels):
                raise ValueError(
                    f"observables.{name} has {len(values)} values, expected {len(labels)}"
                )
        return self


class RatesModel(_FiniteModel):
    """Explicit off-diagonal rates. An empty list is a frozen chain; it passes
    the schema and is rejected as reducible when the bundle is built."""

    kind: Literal["rates"]
    rates: List[RateSpec] = Field(default_factory=list)


class HamiltonianModel(_FiniteModel):
    kind: Literal["hamiltonian"]
    edges: List[Tuple[StateRef, StateRef]] = Field(min_length=1)
    H: Union[Dict[str, float], List[float]]
    dynamics: Literal["glauber", "metropolis"] = "glauber"

    @model_validator(mode="after")
    def _check_energy(self):
        n = len(self.states)
        if isinstance(self.H, list):
            if len(self.H) != n:
                raise ValueError(f"H has {len(self.H)} values, expected {n}")
        else:
            missing = [str(s) for s in self.states if str(s) not in self.H]
            if missing:
                raise ValueError(f"H is missing states {missing}")
        return self


class CyclesModel(_FiniteModel):
    kind: Literal["cycles"]
    cycles: List[CycleSpec] = Field(min_length=1)
    mu0: Optional[List[float]] = None

    @model_validator(mode="after")
    def _check_mu0(self):
        if self.mu0 is not None:
            if len(self.mu0) != len(self.states):
                raise ValueError(f"mu0 has {len(self.mu0)} values, expected {len(self.states)}")
            if min(self.mu0) <= 0:
                raise ValueError("mu0 must be strictly positive")
        return self


class TorusModelSpec(_Document):
    kind: Literal["torus"]
    name: Optional[str] = None
    description: Optional[str] = None
    H: FourierSpec = Field(default_factory=FourierSpec)
    psi: float = Field(default=0.0, allow_inf_nan=False)
    f: FourierSpec = Field(default_factory=FourierSpec)
    observables: Dict[str, FourierSpec] = Field(default_factory=dict)


ModelDocument = Union[RatesModel, HamiltonianModel, CyclesModel, TorusModelSpec]

MODEL_KINDS: Dict[str, type[BaseModel]] = {
    "rates": RatesModel,
    "hamiltonian": HamiltonianModel,
    "cycles": CyclesModel,
    "torus": TorusModelSpec,
}


# run configs

class KernelOverrideSpec(_Document):
    """Shift of one kernel entry, for fault-injection runs."""

    x: StateRef
    y: StateRef
    eps: float = Field(default=1e-3, allow_inf_nan=False)


class BEntrySpec(_Document):
    from_: StateRef = Field(alias="from")
    to: StateRef
    value: float = Field(allow_inf_nan=False)


class McSpec(_Document):
    n_paths: int = Field(default=100_000, ge=1)
    dt: float = Field(default=1e-3, gt=0)
    T: float = Field(default=5.0, gt=0)
    s: float = Field(default=1.0, ge=0)
    t: float = Field(default=2.0, gt=0)
    ds: float = Field(default=0.1, gt=0)
    bins: int = Field(default=64, ge=2)
    n_grid: int = Field(default=256, ge=2)
    grids: List[int] = Field(default_factory=lambda: [64, 128, 256])
    deltas: List[float] = Field(default_factory=lambda: [0.4, 0.2, 0.1])
    weak_dts: List[float] = Field(default_factory=lambda: [0.08, 0.04, 0.02, 0.01])
    weak_paths: int = Field(default=20_000, ge=1)
    stride: Optional[int] = Field(default=None, ge=1)
    paths_out: Optional[str] = None


class RunConfig(_Document):
    """A verification run over one model."""

    model: str
    family: str = "TimeChange"
    variant: Literal["time_change", "langevin"] = "time_change"
    b: Optional[List[BEntrySpec]] = None
    f: str = "f"
    g: List[str] = Field(default_factory=lambda: ["g"], min_length=1)
    initial: Optional[str] = None
    times: List[Tuple[float, float]] = Field(
        default_factory=lambda: [(0.1, 1.0), (0.5, 2.0), (1.0, 1.5)]
    )
    v_grid: List[float] = Field(default_factory=lambda: [0.0, 0.3, 1.0])
    tau: List[float] = Field(default_factory=lambda: [0.5])
    response_t: float = Field(default=1.0, ge=0)
    window: Tuple[float, float] = (0.0, 0.0)
    deltas: Optional[List[float]] = None
    s_grid: Optional[List[float]] = None
    checks: Optional[List[str]] = None
    tolerances: Dict[str, float] = Field(default_factory=dict)
    config: Dict[str, Any] = Field(default_factory=dict)
    kernel_override: Optional[KernelOverrideSpec] = None
    mc: McSpec = Field(default_factory=McSpec)

    @model_validator(mode="after")
    def _check_grids(self):
        for s, t in self.times:
            if not 0 <= s <= t:
                raise ValueError(f"times entry ({s}, {t}) needs 0 <= s <= t")
        if min(self.window) < 0:
            raise ValueError("window times must be nonnegative")
        return self
