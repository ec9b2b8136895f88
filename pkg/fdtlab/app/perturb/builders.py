"""Seeded random chains, observables and families for batteries and tests."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from fdtlab.app.markov.generator import build_generator
from fdtlab.app.markov.invariant import invariant_measure
from fdtlab.app.markov.types import Generator, Measure, Observable, StateSpace
from .cycles import Cycle, cycle_family, cycle_flow
from .family import FamilyKind, PerturbationFamily, shift_to_nonnegative
from .general_b import adjoint_difference, general_b_family
from .gibbs import HamiltonianGraph, glauber_family, metropolis_family
from .langevin import langevin_family
from .time_change import time_change_family


def random_generator(
    rng: np.random.Generator,
    n: int,
    *,
    density: float = 0.4,
    reversible: bool = False,
) -> Generator:
    """Irreducible chain: a one-way ring backbone plus random extra jumps.

    With ``reversible=True`` the chain is a Metropolis-like reversible chain
    on a symmetric graph with random conductances.
    """
    space = StateSpace.of_size(n)
    if reversible:
        weights = rng.uniform(0.5, 2.0, size=n)
        conductance = np.zeros((n, n))
        for x in range(n):
            y = (x + 1) % n
            conductance[x, y] = conductance[y, x] = rng.uniform(0.3, 1.5)
        extra = np.triu(rng.random((n, n)) < density, k=2)
        c = rng.uniform(0.1, 1.0, size=(n, n))
        conductance += np.where(extra | extra.T, (c + c.T) / 2, 0.0)
        np.fill_diagonal(conductance, 0.0)
        # c(x,y) = C(x,y)/w(x) is reversible for w
        rates = conductance / weights[:, None]
    else:
        rates = np.zeros((n, n))
        for x in range(n):
            rates[x, (x + 1) % n] = rng.uniform(0.5, 1.5)
        mask = rng.random((n, n)) < density
        np.fill_diagonal(mask, False)
        rates = np.where(mask & (rates == 0), rng.uniform(0.05, 1.0, size=(n, n)), rates)
    entries = [(x, y, float(rates[x, y])) for x in range(n) for y in range(n) if rates[x, y] > 0]
    return build_generator(space, entries)


def random_observable(rng: np.random.Generator, space: StateSpace, scale: float = 1.0) -> Observable:
    return Observable(space, rng.normal(0.0, scale, size=space.n))


def random_cycles(
    rng: np.random.Generator, n: int, count: int | None = None, *, beta_scale: float = 0.5
) -> list[Cycle]:
    """Ring cycle plus random cycles; every state is on the ring so the chain is irreducible."""
    cycles = [Cycle(tuple(range(n)), float(rng.uniform(0.5, 1.5)), float(rng.uniform(-0.3, 0.3)))]
    for _ in range(count if count is not None else max(1, n // 2)):
        length = int(rng.integers(2, min(n, 4) + 1))
        states = tuple(int(s) for s in rng.choice(n, size=length, replace=False))
        alpha = float(rng.uniform(0.2, 1.0))
        beta = float(rng.uniform(-beta_scale, beta_scale)) * alpha
        cycles.append(Cycle(states, alpha, beta))
    return cycles


def random_hamiltonian_graph(rng: np.random.Generator, n: int, *, chords: int = 2) -> HamiltonianGraph:
    space = StateSpace.of_size(n)
    edges = {(x, (x + 1) % n) for x in range(n)} if n > 2 else {(0, 1)}
    for _ in range(chords if n > 3 else 0):
        x, y = (int(v) for v in rng.choice(n, size=2, replace=False))
        edges.add((x, y))
    return HamiltonianGraph.build(space, edges, rng.normal(0.0, 1.0, size=n))


def random_b(
    rng: np.random.Generator, L: Generator, mu0: Measure
) -> np.ndarray:
    """r₁(c* − c) + r₂c + a nonnegative cycle flow, balanced by construction."""
    n = L.n
    r1 = float(rng.uniform(0.0, 0.8))
    r2 = float(rng.uniform(-0.5, 0.5))
    b = r1 * adjoint_difference(L, mu0) + r2 * L.offdiag
    cycles = [Cycle(tuple(range(n)), 1.0)]
    weights = [float(rng.uniform(0.0, 0.5))]
    b += cycle_flow(L.space, cycles, weights) / mu0.weights[:, None]
    np.fill_diagonal(b, 0.0)
    return b


def random_family(
    rng: np.random.Generator,
    kind: FamilyKind | str,
    n: int,
    f_values: Sequence[float] | None = None,
) -> PerturbationFamily:
    """A random instance of the given family kind on n states."""
    kind = FamilyKind.parse(kind)
    space = StateSpace.of_size(n)
    f = Observable(space, f_values) if f_values is not None else random_observable(rng, space)

    if kind is FamilyKind.CYCLE:
        mu0 = Measure.probability(space, rng.uniform(0.5, 2.0, size=n))
        return cycle_family(space, mu0, random_cycles(rng, n), f)
    if kind in (FamilyKind.METROPOLIS, FamilyKind.GLAUBER):
        hg = random_hamiltonian_graph(rng, n)
        build = metropolis_family if kind is FamilyKind.METROPOLIS else glauber_family
        return build(hg, f)

    L = random_generator(rng, n)
    mu0 = invariant_measure(L)
    if kind is FamilyKind.TIME_CHANGE:
        return time_change_family(L, mu0, f)
    if kind is FamilyKind.LANGEVIN:
        return langevin_family(L, mu0, shift_to_nonnegative(f))
    return general_b_family(L, mu0, f, random_b(rng, L, mu0))
