"""Perturbation families: δ ↦ L^{δf} together with the response kernel A_f."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Optional

import numpy as np

from fdtlab.app.config import constants
from fdtlab.app.infra.errors import DeltaTooLarge, PerturbationError
from fdtlab.app.markov.types import (
    Generator,
    Measure,
    Observable,
    StateSpace,
    Vector,
    refill_diagonal,
    values_of,
)


class FamilyKind(str, Enum):
    TIME_CHANGE = "TimeChange"
    LANGEVIN = "Langevin"
    GENERAL_B = "GeneralB"
    CYCLE = "Cycle"
    METROPOLIS = "Metropolis"
    GLAUBER = "Glauber"

    @classmethod
    def parse(cls, value: "str | FamilyKind") -> "FamilyKind":
        if isinstance(value, FamilyKind):
            return value
        key = str(value).replace("_", "").replace("-", "").lower()
        for kind in cls:
            if kind.value.lower() == key:
                return kind
        raise PerturbationError(
            f"unknown family kind '{value}'",
            code="UNKNOWN_FAMILY",
            details={"known": [k.value for k in cls]},
        )


@dataclass(frozen=True, eq=False)
class ResponseKernel:
    """A_f g(x) = Σ_y a(x,y)(g(y) − g(x)); rows sum to 0 so A_f𝟙 = 0."""

    space: StateSpace
    matrix: np.ndarray

    def __post_init__(self) -> None:
        M = np.array(self.matrix, dtype=np.float64, copy=True)
        if M.shape != (self.space.n, self.space.n):
            raise PerturbationError(f"kernel has shape {M.shape}")
        if not np.all(np.isfinite(M)):
            raise PerturbationError("kernel entries must be finite")
        scale = max(1.0, float(np.max(np.abs(M))))
        if np.max(np.abs(M.sum(axis=1))) > constants.KERNEL_ROW_SUM_TOL * scale:
            raise PerturbationError("kernel rows must sum to 0", code="KERNEL_ROW_SUM")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @classmethod
    def from_offdiag(cls, space: StateSpace, offdiag: np.ndarray) -> "ResponseKernel":
        return cls(space, refill_diagonal(offdiag))

    @property
    def offdiag(self) -> np.ndarray:
        off = np.array(self.matrix, copy=True)
        np.fill_diagonal(off, 0.0)
        return off

    def apply(self, g: Vector) -> np.ndarray:
        return self.matrix @ values_of(g)


RatesFn = Callable[[float], np.ndarray]
Rebuild = Callable[[Observable], "PerturbationFamily"]


@dataclass(frozen=True, eq=False)
class PerturbationFamily:
    """A Markovian perturbation of ``base`` in direction ``f``.

    ``rates_fn(δ)`` returns the off-diagonal perturbed rates; the
    unnormalized measure e^{δf}∘μ⁰ is invariant for every admissible δ,
    which ranges over [0, delta_cap].
    """

    kind: FamilyKind
    base: Generator
    mu0: Measure
    f: Observable
    kernel: ResponseKernel
    rates_fn: RatesFn
    delta_cap: float = math.inf
    symmetric: bool = False
    rebuild: Optional[Rebuild] = None
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def space(self) -> StateSpace:
        return self.base.space

    @property
    def n(self) -> int:
        return self.base.n

    def check_delta(self, delta: float) -> float:
        """Validate δ against [0, delta_cap].

        Raises:
            DeltaTooLarge: δ outside the admissible range
        """
        delta = float(delta)
        if not math.isfinite(delta) or delta < 0 or delta > self.delta_cap:
            raise DeltaTooLarge(delta, self.delta_cap)
        return delta

    def generator_at(self, delta: float) -> Generator:
        delta = self.check_delta(delta)
        if delta == 0.0:
            return self.base
        off = self.rates_fn(delta)
        scale = max(1.0, float(np.max(np.abs(off))))
        if np.min(off) < -1e-13 * scale:
            # rates left the cone before the nominal cap
            raise DeltaTooLarge(delta, self.delta_cap)
        return Generator.from_offdiag(self.space, off, clip=1e-13 * scale)

    def perturbed_measure(self, delta: float) -> Measure:
        """Unnormalized μ^{δf} = e^{δf}∘μ⁰."""
        return self.mu0.tilt(self.f, self.check_delta(delta))

    def scaled(self, r: float) -> "PerturbationFamily":
        """The family built from direction r·f."""
        if self.rebuild is None:
            raise PerturbationError(f"{self.kind.value} family cannot be rebuilt")
        return self.rebuild(Observable(self.space, r * self.f.values))

    def with_kernel(self, matrix: np.ndarray) -> "PerturbationFamily":
        kernel = ResponseKernel(self.space, matrix)
        return dataclasses.replace(self, kernel=kernel, rebuild=None)

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "n": self.n,
            "delta_cap": self.delta_cap,
            "symmetric": self.symmetric,
            **{k: v for k, v in self.params.items() if isinstance(v, (int, float, str, bool))},
        }


def shift_to_nonnegative(f: "Observable | np.ndarray") -> Observable | np.ndarray:
    """f − min f; the normalized perturbed measure is unchanged by the shift."""
    if isinstance(f, Observable):
        return Observable(f.space, f.values - f.values.min())
    values = values_of(f)
    return values - values.min()


def corrupt_kernel(fam: PerturbationFamily, x: int, y: int, eps: float) -> PerturbationFamily:
    """Copy of ``fam`` whose kernel entry a(x,y) is shifted by ``eps`` (diagonal rebalanced)."""
    if x == y:
        raise PerturbationError("kernel corruption needs an off-diagonal entry", code="SELF_LOOP")
    off = fam.kernel.offdiag
    off[x, y] += eps
    corrupted = fam.with_kernel(refill_diagonal(off))
    return dataclasses.replace(
        corrupted, params={**fam.params, "corrupted": {"x": x, "y": y, "eps": eps}}
    )
