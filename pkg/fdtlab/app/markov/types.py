"""Core value types: state spaces, generators, measures and observables.

All types are frozen dataclasses over read-only float64 arrays. Operations
accept either the wrapped type or a plain array wherever a vector is
expected (see :func:`values_of`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from fdtlab.app.config import constants
from fdtlab.app.infra.errors import MarkovError, NegativeRate, ValidationError


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class StateSpace:
    n: int
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValidationError(f"state space needs n >= 2, got {self.n}")
        labels = tuple(self.labels) if self.labels else tuple(str(i) for i in range(self.n))
        if len(labels) != self.n:
            raise ValidationError(f"expected {self.n} labels, got {len(labels)}")
        if len(set(labels)) != self.n:
            raise ValidationError("state labels must be unique")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def of_size(cls, n: int) -> "StateSpace":
        return cls(n)

    @classmethod
    def from_labels(cls, labels: Iterable[str]) -> "StateSpace":
        labels = tuple(str(label) for label in labels)
        return cls(len(labels), labels)

    def index(self, label: str | int) -> int:
        if isinstance(label, (int, np.integer)):
            if not 0 <= int(label) < self.n:
                raise ValidationError(f"state index {label} out of range 0..{self.n - 1}")
            return int(label)
        try:
            return self.labels.index(label)
        except ValueError as exc:
            raise ValidationError(f"unknown state label '{label}'") from exc


@dataclass(frozen=True, eq=False)
class Observable:
    space: StateSpace
    values: np.ndarray

    def __post_init__(self) -> None:
        values = _frozen(np.asarray(self.values, dtype=np.float64).reshape(-1))
        if values.shape != (self.space.n,):
            raise ValidationError(
                f"observable has {values.shape[0]} values for a space of {self.space.n} states"
            )
        if not np.all(np.isfinite(values)):
            raise ValidationError("observable values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, space: StateSpace, value: float = 1.0) -> "Observable":
        return cls(space, np.full(space.n, float(value)))

    @classmethod
    def indicator(cls, space: StateSpace, state: int) -> "Observable":
        values = np.zeros(space.n)
        values[space.index(state)] = 1.0
        return cls(space, values)

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        return self.values if dtype is None else self.values.astype(dtype)


@dataclass(frozen=True, eq=False)
class Measure:
    space: StateSpace
    weights: np.ndarray
    normalized: bool = False

    def __post_init__(self) -> None:
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if weights.shape != (self.space.n,):
            raise ValidationError(
                f"measure has {weights.shape[0]} weights for a space of {self.space.n} states"
            )
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise ValidationError("measure weights must be finite and strictly positive")
        if self.normalized and abs(weights.sum() - 1.0) > constants.MEASURE_SUM_TOL:
            raise ValidationError(f"normalized measure sums to {weights.sum():.15g}")
        object.__setattr__(self, "weights", _frozen(weights))

    @classmethod
    def probability(cls, space: StateSpace, weights: Sequence[float] | np.ndarray) -> "Measure":
        w = np.asarray(weights, dtype=np.float64)
        return cls(space, w / w.sum(), normalized=True)

    @classmethod
    def uniform(cls, space: StateSpace) -> "Measure":
        return cls(space, np.full(space.n, 1.0 / space.n), normalized=True)

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def normalize(self) -> "Measure":
        return Measure.probability(self.space, self.weights)

    def tilt(self, f: "Observable | np.ndarray", delta: float = 1.0) -> "Measure":
        """Unnormalized e^{δf}∘μ."""
        return Measure(self.space, np.exp(delta * values_of(f)) * self.weights)

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        return self.weights if dtype is None else self.weights.astype(dtype)


@dataclass(frozen=True, eq=False)
class Generator:
    """Rate matrix of a conservative jump chain: c(x,y) off the diagonal, rows sum to 0."""

    space: StateSpace
    rates: np.ndarray

    def __post_init__(self) -> None:
        rates = np.asarray(self.rates, dtype=np.float64)
        n = self.space.n
        if rates.shape != (n, n):
            raise ValidationError(f"rate matrix has shape {rates.shape}, expected ({n}, {n})")
        if not np.all(np.isfinite(rates)):
            raise ValidationError("rate matrix must be finite")
        off = rates.copy()
        np.fill_diagonal(off, 0.0)
        if np.any(off < 0):
            x, y = np.unravel_index(int(np.argmin(off)), off.shape)
            raise NegativeRate(int(x), int(y), float(off[x, y]))
        scale = max(1.0, float(np.max(np.abs(np.diag(rates)))))
        row_sums = np.abs(rates.sum(axis=1))
        if np.max(row_sums) > constants.ROW_SUM_TOL * scale:
            raise MarkovError(
                f"generator rows must sum to 0 (max |row sum| {np.max(row_sums):.3e})",
                code="ROW_SUM",
                details={"max_row_sum": float(np.max(row_sums))},
            )
        object.__setattr__(self, "rates", _frozen(rates))

    @classmethod
    def from_offdiag(
        cls, space: StateSpace, offdiag: np.ndarray, *, clip: float = 0.0
    ) -> "Generator":
        """Build from off-diagonal rates, refilling the diagonal.

        Entries in ``[-clip, 0)`` are treated as round-off and set to zero.
        """
        off = np.array(offdiag, dtype=np.float64, copy=True)
        np.fill_diagonal(off, 0.0)
        if clip > 0:
            off[(off < 0) & (off >= -clip)] = 0.0
        np.fill_diagonal(off, -off.sum(axis=1))
        return cls(space, off)

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def offdiag(self) -> np.ndarray:
        off = np.array(self.rates, copy=True)
        np.fill_diagonal(off, 0.0)
        return off

    @property
    def exit_rates(self) -> np.ndarray:
        return -np.diag(self.rates)

    @property
    def uniformization_rate(self) -> float:
        return float(np.max(self.exit_rates))

    def apply(self, g: "Observable | np.ndarray") -> np.ndarray:
        """L g as a plain vector."""
        return self.rates @ values_of(g)

    def sup_norm(self) -> float:
        """Operator norm on (R^n, sup): max absolute row sum."""
        return float(np.max(np.abs(self.rates).sum(axis=1)))


Vector = Union[Observable, Measure, np.ndarray, Sequence[float]]


def values_of(obj: Vector) -> np.ndarray:
    """Plain float64 vector behind an Observable, Measure or array-like."""
    if isinstance(obj, Observable):
        return obj.values
    if isinstance(obj, Measure):
        return obj.weights
    return np.asarray(obj, dtype=np.float64).reshape(-1)


def matrix_of(L: "Generator | np.ndarray") -> np.ndarray:
    if isinstance(L, Generator):
        return L.rates
    return np.asarray(L, dtype=np.float64)


def refill_diagonal(matrix: np.ndarray) -> np.ndarray:
    """Copy with the diagonal set to minus the off-diagonal row sums."""
    out = np.array(matrix, dtype=np.float64, copy=True)
    np.fill_diagonal(out, 0.0)
    np.fill_diagonal(out, -out.sum(axis=1))
    return out
