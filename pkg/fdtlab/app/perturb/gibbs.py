"""Metropolis and Glauber dynamics for a Gibbs measure e^{−H} on a graph.

Base rates are c(x,y) = e^{H(x)} α(x,y) on edges with
α_M = min(e^{−H(x)}, e^{−H(y)}) and α_G = 1/(e^{H(x)} + e^{H(y)}).
The perturbation replaces H by H − δf, so e^{δf}∘μ⁰ stays invariant and
every L^{δf} is reversible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from fdtlab.app.config import constants
from fdtlab.app.infra.errors import Disconnected, ValidationError
from fdtlab.app.markov.types import Generator, Measure, Observable, StateSpace
from .family import FamilyKind, PerturbationFamily, ResponseKernel


@dataclass(frozen=True, eq=False)
class HamiltonianGraph:
    space: StateSpace
    edges: frozenset[tuple[int, int]]
    H: Observable

    def __post_init__(self) -> None:
        clean: set[tuple[int, int]] = set()
        for x, y in self.edges:
            x, y = self.space.index(x), self.space.index(y)
            if x == y:
                raise ValidationError(f"self-loop edge at state {x}")
            clean.add((x, y))
            clean.add((y, x))
        object.__setattr__(self, "edges", frozenset(clean))

    @classmethod
    def build(
        cls, space: StateSpace, edges: Iterable[tuple[int, int]], H: "Observable | np.ndarray"
    ) -> "HamiltonianGraph":
        energy = H if isinstance(H, Observable) else Observable(space, H)
        return cls(space, frozenset(tuple(e) for e in edges), energy)

    @property
    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.space.n, self.space.n), dtype=bool)
        for x, y in self.edges:
            adj[x, y] = True
        return adj

    def require_connected(self) -> None:
        count, _ = connected_components(
            csr_matrix(self.adjacency.astype(np.int8)), directed=False
        )
        if count != 1:
            raise Disconnected(int(count))

    def gibbs_measure(self) -> Measure:
        h = self.H.values
        return Measure.probability(self.space, np.exp(-(h - h.min())))


def _delta_h(h: np.ndarray) -> np.ndarray:
    """ΔH(x,y) = H(y) − H(x)."""
    return h[None, :] - h[:, None]


def metropolis_rates(adjacency: np.ndarray, h: np.ndarray) -> np.ndarray:
    """c(x,y) = min(1, e^{−ΔH}) on edges."""
    dh = _delta_h(h)
    return np.where(adjacency, np.exp(-np.maximum(dh, 0.0)), 0.0)


def glauber_rates(adjacency: np.ndarray, h: np.ndarray) -> np.ndarray:
    """c(x,y) = 1/(1 + e^{ΔH}) on edges."""
    dh = _delta_h(h)
    # logistic in the overflow-safe form
    rates = np.where(dh > 0, np.exp(-np.abs(dh)) / (1.0 + np.exp(-np.abs(dh))),
                     1.0 / (1.0 + np.exp(-np.abs(dh))))
    return np.where(adjacency, rates, 0.0)


def metropolis_kernel(
    adjacency: np.ndarray, h: np.ndarray, f: np.ndarray, tie_tol: float
) -> np.ndarray:
    """a_M(x,y) = (f(y)−f(x)) e^{−ΔH} (1{ΔH>0} + 1{ΔH=0} 1{f(x)>f(y)})."""
    dh = _delta_h(h)
    df = f[None, :] - f[:, None]
    tie = np.abs(dh) <= tie_tol
    active = (~tie & (dh > 0)) | (tie & (df < 0))
    return np.where(adjacency & active, df * np.exp(-np.where(tie, 0.0, dh)), 0.0)


def glauber_kernel(adjacency: np.ndarray, h: np.ndarray, f: np.ndarray) -> np.ndarray:
    """a_G(x,y) = (f(y)−f(x)) e^{−ΔH}/(1 + e^{−ΔH})²."""
    dh = _delta_h(h)
    df = f[None, :] - f[:, None]
    e = np.exp(-np.abs(dh))
    weight = e / (1.0 + e) ** 2  # symmetric in ΔH
    return np.where(adjacency, df * weight, 0.0)


def _gibbs_family(
    kind: FamilyKind, hg: HamiltonianGraph, f: Observable, tie_tol: float
) -> PerturbationFamily:
    hg.require_connected()
    adjacency = hg.adjacency
    h = hg.H.values
    fv = f.values
    rate_rule = metropolis_rates if kind is FamilyKind.METROPOLIS else glauber_rates
    base = Generator.from_offdiag(hg.space, rate_rule(adjacency, h))
    if kind is FamilyKind.METROPOLIS:
        kernel_off = metropolis_kernel(adjacency, h, fv, tie_tol)
    else:
        kernel_off = glauber_kernel(adjacency, h, fv)

    def rates(delta: float) -> np.ndarray:
        return rate_rule(adjacency, h - delta * fv)

    return PerturbationFamily(
        kind=kind,
        base=base,
        mu0=hg.gibbs_measure(),
        f=f,
        kernel=ResponseKernel.from_offdiag(hg.space, kernel_off),
        rates_fn=rates,
        symmetric=True,
        rebuild=lambda g: _gibbs_family(kind, hg, g, tie_tol),
        params={"edges": len(hg.edges) // 2},
    )


def metropolis_family(
    hg: HamiltonianGraph, f: Observable, tie_tol: float = constants.METROPOLIS_TIE_TOL
) -> PerturbationFamily:
    """Metropolis dynamics with H → H − δf.

    The kernel is one-sided on ΔH = 0 edges, so A_{−f} ≠ −A_f there.

    Raises:
        Disconnected: the graph is not connected
    """
    return _gibbs_family(FamilyKind.METROPOLIS, hg, f, tie_tol)


def glauber_family(hg: HamiltonianGraph, f: Observable) -> PerturbationFamily:
    """Glauber (heat-bath) dynamics with H → H − δf.

    Raises:
        Disconnected: the graph is not connected
    """
    return _gibbs_family(FamilyKind.GLAUBER, hg, f, constants.METROPOLIS_TIE_TOL)
