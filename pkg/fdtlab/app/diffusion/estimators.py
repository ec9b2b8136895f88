"""Monte Carlo point estimates with standard errors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np


@dataclass(frozen=True)
class EstimatorResult:
    estimate: float
    stderr: float
    n_effective: int

    def z_score(self, reference: float) -> float:
        if self.stderr == 0:
            return 0.0 if self.estimate == reference else math.inf
        return abs(self.estimate - reference) / self.stderr

    def to_dict(self) -> dict:
        return {"estimate": self.estimate, "stderr": self.stderr, "n_effective": self.n_effective}


def from_influence(estimate: float, influence: np.ndarray) -> EstimatorResult:
    """Estimate with stderr std(ψ)/√n from per-sample influence values ψ."""
    psi = np.asarray(influence, dtype=np.float64)
    n = int(psi.size)
    stderr = float(np.std(psi, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return EstimatorResult(float(estimate), stderr, n)


def mean_estimate(samples: np.ndarray) -> EstimatorResult:
    x = np.asarray(samples, dtype=np.float64)
    return from_influence(float(x.mean()), x)


def covariance_influence(a: np.ndarray, b: np.ndarray) -> tuple[float, np.ndarray]:
    """Sample covariance of paired samples and its influence values."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    products = (a - a.mean()) * (b - b.mean())
    cov = float(products.mean())
    return cov, products - cov


def covariance_estimate(a: np.ndarray, b: np.ndarray) -> EstimatorResult:
    cov, influence = covariance_influence(a, b)
    return from_influence(cov, influence)


def variance_estimate(x: np.ndarray) -> EstimatorResult:
    return covariance_estimate(x, x)


def combined_stderr(*results: EstimatorResult) -> float:
    """√Σ se²; for independent estimates only."""
    return math.sqrt(sum(r.stderr**2 for r in results))


@dataclass(frozen=True)
class Moments:
    """Count, mean and centered second moment; ``merge`` is associative."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def of(cls, samples: np.ndarray) -> "Moments":
        x = np.asarray(samples, dtype=np.float64)
        if x.size == 0:
            return cls()
        mean = float(x.mean())
        return cls(int(x.size), mean, float(np.sum((x - mean) ** 2)))

    def merge(self, other: "Moments") -> "Moments":
        if self.count == 0:
            return other
        if other.count == 0:
            return self
        count = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / count
        m2 = self.m2 + other.m2 + delta**2 * self.count * other.count / count
        return Moments(count, mean, m2)

    @classmethod
    def merge_all(cls, parts: Iterable["Moments"]) -> "Moments":
        total = cls()
        for part in parts:
            total = total.merge(part)
        return total

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else math.nan

    def result(self) -> EstimatorResult:
        stderr = math.sqrt(self.variance / self.count) if self.count > 1 else math.inf
        return EstimatorResult(self.mean, stderr, self.count)
