"""Real trigonometric polynomials on the circle [0, 2π)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np

from fdtlab.app.infra.errors import ValidationError

CONJUGATE_TOL = 1e-12


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class FourierSeries:
    """Σ_{k=−K..K} c_k e^{ikx} with c_{−k} = conj(c_k).

    ``coeffs[j]`` holds c_{j−K}. Evaluation uses the equivalent real form
    a₀ + Σ a_k cos kx + b_k sin kx.
    """

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.array(self.coeffs, dtype=np.complex128).reshape(-1)
        if c.size % 2 == 0:
            raise ValidationError(f"need 2K+1 coefficients, got {c.size}")
        if not np.all(np.isfinite(c)):
            raise ValidationError("Fourier coefficients must be finite")
        scale = max(1.0, float(np.max(np.abs(c))))
        if np.max(np.abs(c - np.conj(c[::-1]))) > CONJUGATE_TOL * scale:
            raise ValidationError("Fourier coefficients are not conjugate-symmetric (series not real)")
        object.__setattr__(self, "coeffs", _frozen(c))

    @classmethod
    def from_real(
        cls, a0: float = 0.0, cos: Sequence[float] = (), sin: Sequence[float] = ()
    ) -> "FourierSeries":
        """a₀ + Σ_k cos[k−1]·cos kx + sin[k−1]·sin kx."""
        K = max(len(cos), len(sin))
        a = np.zeros(K)
        b = np.zeros(K)
        a[: len(cos)] = cos
        b[: len(sin)] = sin
        positive = (a - 1j * b) / 2.0
        c = np.concatenate([np.conj(positive[::-1]), [complex(a0)], positive])
        return cls(c)

    @classmethod
    def constant(cls, value: float) -> "FourierSeries":
        return cls.from_real(value)

    @classmethod
    def zero(cls) -> "FourierSeries":
        return cls.from_real(0.0)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FourierSeries":
        return cls.from_real(
            float(data.get("a0", 0.0)),
            [float(v) for v in data.get("cos", ())],
            [float(v) for v in data.get("sin", ())],
        )

    @property
    def order(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def a0(self) -> float:
        return float(self.coeffs[self.order].real)

    @property
    def cos_coeffs(self) -> np.ndarray:
        return 2.0 * self.coeffs[self.order + 1:].real

    @property
    def sin_coeffs(self) -> np.ndarray:
        return -2.0 * self.coeffs[self.order + 1:].imag

    def to_dict(self) -> dict[str, Any]:
        return {"a0": self.a0, "cos": self.cos_coeffs.tolist(), "sin": self.sin_coeffs.tolist()}

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.coeffs[self.order + 1:] == 0))

    def __call__(self, x: "float | np.ndarray") -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        out = np.full(x.shape, self.a0)
        K = self.order
        if K == 0:
            return out
        a, b = self.cos_coeffs, self.sin_coeffs
        c1, s1 = np.cos(x), np.sin(x)
        ck, sk = c1, s1
        for k in range(K):
            out += a[k] * ck + b[k] * sk
            if k + 1 < K:
                # angle addition: cos((k+1)x), sin((k+1)x) from cos kx, sin kx
                ck, sk = ck * c1 - sk * s1, sk * c1 + ck * s1
        return out

    def derivative(self, order: int = 1) -> "FourierSeries":
        k = np.arange(-self.order, self.order + 1)
        return FourierSeries(self.coeffs * (1j * k) ** order)

    def __add__(self, other: "FourierSeries") -> "FourierSeries":
        K = max(self.order, other.order)
        out = np.zeros(2 * K + 1, dtype=np.complex128)
        out[K - self.order: K + self.order + 1] += self.coeffs
        out[K - other.order: K + other.order + 1] += other.coeffs
        return FourierSeries(out)

    def __mul__(self, r: float) -> "FourierSeries":
        return FourierSeries(self.coeffs * float(r))

    __rmul__ = __mul__

    def sup(self, points: int = 4096) -> float:
        """max |series| sampled on a fine grid."""
        x = np.linspace(0.0, 2 * np.pi, points, endpoint=False)
        return float(np.max(np.abs(self(x))))
