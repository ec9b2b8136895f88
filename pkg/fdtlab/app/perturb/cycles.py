"""Chains built from weighted oriented cycles.

c(x,y)      = (1/μ⁰(x)) Σ_γ α(γ) 1{(x,y) ∈ γ}
c^{δf}(x,y) = (e^{−δf(x)}/μ⁰(x)) Σ_γ (α(γ) + δβ(γ)) 1{(x,y) ∈ γ}
a(x,y)      = −f(x)c(x,y) + (1/μ⁰(x)) Σ_γ β(γ) 1{(x,y) ∈ γ}
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from fdtlab.app.infra.errors import MalformedCycle, NegativeAlpha
from fdtlab.app.markov.types import Generator, Measure, Observable, StateSpace
from .family import FamilyKind, PerturbationFamily, ResponseKernel


@dataclass(frozen=True)
class Cycle:
    states: tuple[int, ...]
    alpha: float
    beta: float = 0.0

    @property
    def edges(self) -> list[tuple[int, int]]:
        k = len(self.states)
        return [(self.states[i], self.states[(i + 1) % k]) for i in range(k)]


def normalize_cycle(space: StateSpace, states: Sequence[int | str]) -> tuple[int, ...]:
    """Validate a cycle given as [x0, ..., xk] with an optional closing repeat of x0.

    Raises:
        MalformedCycle: fewer than 2 states or a repeated state
    """
    if states is None or len(states) == 0:
        raise MalformedCycle(states, "empty cycle")
    idx = [space.index(s) for s in states]
    if len(idx) > 2 and idx[0] == idx[-1]:
        idx = idx[:-1]
    elif len(idx) == 2 and idx[0] == idx[1]:
        raise MalformedCycle(idx, "self-loop")
    if len(idx) < 2:
        raise MalformedCycle(idx, "a cycle needs at least 2 distinct states")
    if len(set(idx)) != len(idx):
        raise MalformedCycle(idx, "states must be distinct")
    return tuple(idx)


def build_cycles(
    space: StateSpace,
    specs: Iterable[tuple[Sequence[int | str], float, float]],
) -> list[Cycle]:
    """Cycles from (states, alpha, beta) triples.

    Raises:
        MalformedCycle, NegativeAlpha
    """
    cycles = []
    for i, (states, alpha, beta) in enumerate(specs):
        if alpha < 0 or not math.isfinite(alpha):
            raise NegativeAlpha(i, float(alpha))
        cycles.append(Cycle(normalize_cycle(space, states), float(alpha), float(beta)))
    return cycles


def cycle_flow(space: StateSpace, cycles: Sequence[Cycle], weights: Sequence[float]) -> np.ndarray:
    """Σ_γ w(γ) 1{(x,y) ∈ γ} as an off-diagonal matrix (a divergence-free flow)."""
    flow = np.zeros((space.n, space.n))
    for cycle, w in zip(cycles, weights):
        for x, y in cycle.edges:
            flow[x, y] += w
    return flow


def cycle_cap(cycles: Sequence[Cycle]) -> float:
    """Largest δ keeping α + δβ ≥ 0 on every cycle."""
    cap = math.inf
    for cycle in cycles:
        if cycle.beta < 0:
            cap = min(cap, cycle.alpha / -cycle.beta)
    return cap


def cycle_generator(space: StateSpace, mu0: Measure, cycles: Sequence[Cycle]) -> Generator:
    """Base generator; μ⁰ is invariant by construction."""
    flow = cycle_flow(space, cycles, [c.alpha for c in cycles])
    return Generator.from_offdiag(space, flow / mu0.weights[:, None])


def cycle_family(
    space: StateSpace,
    mu0: Measure,
    cycles: Sequence[Cycle],
    f: Observable,
) -> PerturbationFamily:
    """Family obtained by moving cycle weights along β while time-changing by e^{−δf}.

    Raises:
        NegativeAlpha: some α < 0
    """
    for i, cycle in enumerate(cycles):
        if cycle.alpha < 0:
            raise NegativeAlpha(i, cycle.alpha)
    base = cycle_generator(space, mu0, cycles)
    alpha_flow = cycle_flow(space, cycles, [c.alpha for c in cycles])
    beta_flow = cycle_flow(space, cycles, [c.beta for c in cycles])
    inv_mu = 1.0 / mu0.weights
    fv = f.values

    def rates(delta: float) -> np.ndarray:
        return (np.exp(-delta * fv) * inv_mu)[:, None] * (alpha_flow + delta * beta_flow)

    kernel_off = -fv[:, None] * base.offdiag + inv_mu[:, None] * beta_flow
    two_cycles_only = all(len(c.states) == 2 for c in cycles)
    return PerturbationFamily(
        kind=FamilyKind.CYCLE,
        base=base,
        mu0=mu0,
        f=f,
        kernel=ResponseKernel.from_offdiag(space, kernel_off),
        rates_fn=rates,
        delta_cap=cycle_cap(cycles),
        symmetric=two_cycles_only,
        rebuild=lambda g: cycle_family(space, mu0, _rescale_beta(cycles, f, g), g),
        params={"n_cycles": len(cycles), "two_cycles_only": two_cycles_only},
    )


def _rescale_beta(cycles: Sequence[Cycle], f: Observable, g: Observable) -> list[Cycle]:
    """β^{rf} = rβ^f when g = r f."""
    fv, gv = f.values, g.values
    norm = float(np.dot(fv, fv))
    r = float(np.dot(fv, gv)) / norm if norm else 1.0
    if norm and np.allclose(gv, r * fv, rtol=1e-12, atol=1e-14) and r >= 0:
        return [Cycle(c.states, c.alpha, r * c.beta) for c in cycles]
    return list(cycles)
