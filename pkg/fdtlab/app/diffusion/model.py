"""Overdamped diffusion on the circle with a non-symmetric drift component.

dX = b_δ(X) dt + √2 dW,   b_δ = −H′ + δf′ + ψ e^{H − δf}

For every δ the Gibbs density ∝ e^{−H + δf} is invariant: the probability
current b_δρ − ρ′ equals the constant ψ/Z_δ. ψ = 0 is the reversible
Langevin dynamic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from scipy.integrate import quad

from fdtlab.app.infra.errors import ValidationError
from .fourier import FourierSeries

TWO_PI = 2.0 * math.pi


def torus_grid(n: int) -> np.ndarray:
    return np.arange(n) * (TWO_PI / n)


@dataclass(frozen=True, eq=False)
class TorusModel:
    H: FourierSeries
    psi: float = 0.0
    f: FourierSeries = field(default_factory=FourierSeries.zero)

    def __post_init__(self) -> None:
        if not math.isfinite(self.psi):
            raise ValidationError(f"psi must be finite, got {self.psi}")
        object.__setattr__(self, "psi", float(self.psi))
        object.__setattr__(self, "_dH", self.H.derivative())
        object.__setattr__(self, "_df", self.f.derivative())

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TorusModel":
        return cls(
            H=FourierSeries.from_dict(data.get("H", {})),
            psi=float(data.get("psi", 0.0)),
            f=FourierSeries.from_dict(data.get("f", {})),
        )

    def to_dict(self) -> dict[str, Any]:
        return {"H": self.H.to_dict(), "psi": self.psi, "f": self.f.to_dict()}

    @property
    def reversible(self) -> bool:
        return self.psi == 0.0

    def drift(self, x: "float | np.ndarray", delta: float = 0.0) -> np.ndarray:
        """b_δ(x)."""
        out = -self._dH(x)
        if delta:
            out = out + delta * self._df(x)
        if self.psi:
            exponent = self.H(x) - delta * self.f(x) if delta else self.H(x)
            out = out + self.psi * np.exp(exponent)
        return out

    def drift_sup(self, delta: float = 0.0, points: int = 4096) -> float:
        return float(np.max(np.abs(self.drift(torus_grid(points), delta))))

    def response_coefficient(self, x: "float | np.ndarray") -> np.ndarray:
        """f′ − fψe^H, so that A_f g = (f′ − fψe^H) g′."""
        out = self._df(x)
        if self.psi:
            out = out - self.f(x) * self.psi * np.exp(self.H(x))
        return out

    def unnormalized_density(self, x: "float | np.ndarray", delta: float = 0.0) -> np.ndarray:
        exponent = -self.H(x)
        if delta:
            exponent = exponent + delta * self.f(x)
        return np.exp(exponent)

    def partition(self, delta: float = 0.0) -> float:
        value, _ = quad(lambda x: float(self.unnormalized_density(x, delta)), 0.0, TWO_PI,
                        limit=200, epsabs=1e-13, epsrel=1e-13)
        return float(value)

    def gibbs_density(self, x: "float | np.ndarray", delta: float = 0.0) -> np.ndarray:
        return self.unnormalized_density(x, delta) / self.partition(delta)

    def bin_probabilities(self, bins: int, delta: float = 0.0) -> np.ndarray:
        """Gibbs mass of each of ``bins`` equal arcs."""
        edges = np.linspace(0.0, TWO_PI, bins + 1)
        z = self.partition(delta)
        masses = [
            quad(lambda x: float(self.unnormalized_density(x, delta)), lo, hi,
                 epsabs=1e-14, epsrel=1e-12)[0]
            for lo, hi in zip(edges[:-1], edges[1:])
        ]
        return np.asarray(masses) / z

    def probability_current(self, x: "float | np.ndarray", delta: float = 0.0) -> np.ndarray:
        """b_δρ − ρ′ for the normalized Gibbs density ρ; constant in x."""
        rho = self.gibbs_density(x, delta)
        log_slope = -self._dH(x) + (delta * self._df(x) if delta else 0.0)
        return self.drift(x, delta) * rho - log_slope * rho
