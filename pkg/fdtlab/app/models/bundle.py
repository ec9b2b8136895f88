"""Validated model bundles and family construction over them."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Union

import numpy as np

from fdtlab.app.infra.errors import ValidationError
from fdtlab.app.infra.logger import get_logger
from fdtlab.app.diffusion.fourier import FourierSeries
from fdtlab.app.diffusion.model import TorusModel
from fdtlab.app.markov.generator import build_generator
from fdtlab.app.markov.invariant import invariant_measure
from fdtlab.app.markov.types import Generator, Measure, Observable, StateSpace
from fdtlab.app.perturb.cycles import Cycle, build_cycles, cycle_family, cycle_generator
from fdtlab.app.perturb.family import FamilyKind, PerturbationFamily
from fdtlab.app.perturb.general_b import adjoint_difference, general_b_family
from fdtlab.app.perturb.gibbs import (
    HamiltonianGraph,
    glauber_family,
    glauber_rates,
    metropolis_family,
    metropolis_rates,
)
from fdtlab.app.perturb.langevin import langevin_family
from fdtlab.app.perturb.time_change import time_change_family
from .schema import (
    BEntrySpec,
    CyclesModel,
    FourierSpec,
    HamiltonianModel,
    ModelDocument,
    RatesModel,
    TorusModelSpec,
)

logger = get_logger(__name__)

ObservableLike = Union[Observable, FourierSeries]


@dataclass(frozen=True, eq=False)
class ModelBundle:
    """Everything a run needs from one model document.

    Finite models carry ``space``, ``generator`` and ``mu0``; Hamiltonian
    models add ``graph``, cycle models ``cycles``; torus models carry only
    ``torus``.
    """

    kind: str
    name: str
    space: Optional[StateSpace] = None
    generator: Optional[Generator] = None
    mu0: Optional[Measure] = None
    graph: Optional[HamiltonianGraph] = None
    dynamics: Optional[str] = None
    cycles: tuple[Cycle, ...] = ()
    torus: Optional[TorusModel] = None
    observables: Mapping[str, ObservableLike] = field(default_factory=dict)
    source: Optional[Path] = None

    @property
    def is_finite(self) -> bool:
        return self.torus is None

    def observable(self, name: str) -> ObservableLike:
        """Named observable.

        Raises:
            ValidationError: unknown name
        """
        try:
            return self.observables[name]
        except KeyError as exc:
            raise ValidationError(
                f"unknown observable '{name}'",
                details={"known": sorted(self.observables)},
            ) from exc

    def require_finite(self, what: str) -> None:
        if not self.is_finite:
            raise ValidationError(f"{what} needs a finite-state model, got kind '{self.kind}'")

    def require_torus(self, what: str) -> TorusModel:
        if self.torus is None:
            raise ValidationError(f"{what} needs a torus model, got kind '{self.kind}'")
        return self.torus

    def describe(self) -> Dict[str, Any]:
        info: Dict[str, Any] = {"kind": self.kind, "name": self.name,
                                "observables": sorted(self.observables)}
        if self.space is not None:
            info["n"] = self.space.n
            info["states"] = list(self.space.labels)
        if self.graph is not None:
            info["edges"] = len(self.graph.edges) // 2
            info["dynamics"] = self.dynamics
        if self.cycles:
            info["cycles"] = len(self.cycles)
        if self.torus is not None:
            info["psi"] = self.torus.psi
            info["reversible"] = self.torus.reversible
        return info


def fourier_of(spec: FourierSpec) -> FourierSeries:
    return FourierSeries.from_real(spec.a0, spec.cos, spec.sin)


def _observables(space: StateSpace, values: Mapping[str, Sequence[float]]) -> Dict[str, Observable]:
    return {name: Observable(space, np.asarray(v, dtype=np.float64)) for name, v in values.items()}


def _from_rates(doc: RatesModel) -> ModelBundle:
    space = StateSpace.from_labels(doc.states)
    L = build_generator(space, [(_ref(space, r.from_), _ref(space, r.to), r.rate)
                                for r in doc.rates])
    return ModelBundle(kind=doc.kind, name=doc.name or "rates", space=space, generator=L,
                       mu0=invariant_measure(L), observables=_observables(space, doc.observables))


def _from_hamiltonian(doc: HamiltonianModel) -> ModelBundle:
    space = StateSpace.from_labels(doc.states)
    if isinstance(doc.H, list):
        h = np.asarray(doc.H, dtype=np.float64)
    else:
        h = np.array([doc.H[label] for label in space.labels], dtype=np.float64)
    edges = [(_ref(space, x), _ref(space, y)) for x, y in doc.edges]
    graph = HamiltonianGraph.build(space, edges, h)
    graph.require_connected()
    rule = glauber_rates if doc.dynamics == "glauber" else metropolis_rates
    L = Generator.from_offdiag(space, rule(graph.adjacency, h))
    return ModelBundle(kind=doc.kind, name=doc.name or doc.dynamics, space=space, generator=L,
                       mu0=graph.gibbs_measure(), graph=graph, dynamics=doc.dynamics,
                       observables=_observables(space, doc.observables))


def _from_cycles(doc: CyclesModel) -> ModelBundle:
    space = StateSpace.from_labels(doc.states)
    cycles = build_cycles(space, [(c.states, c.alpha, c.beta) for c in doc.cycles])
    weights = doc.mu0 if doc.mu0 is not None else np.ones(space.n)
    mu0 = Measure.probability(space, weights)
    L = cycle_generator(space, mu0, cycles)
    return ModelBundle(kind=doc.kind, name=doc.name or "cycles", space=space, generator=L,
                       mu0=mu0, cycles=tuple(cycles),
                       observables=_observables(space, doc.observables))


def _from_torus(doc: TorusModelSpec) -> ModelBundle:
    model = TorusModel(H=fourier_of(doc.H), psi=doc.psi, f=fourier_of(doc.f))
    observables: Dict[str, ObservableLike] = {
        name: fourier_of(spec) for name, spec in doc.observables.items()
    }
    observables.setdefault("f", model.f)
    return ModelBundle(kind=doc.kind, name=doc.name or "torus", torus=model,
                       observables=observables)


def _ref(space: StateSpace, ref: int | str) -> int:
    # labels win over positions when a label looks like an integer
    if isinstance(ref, int) and str(ref) in space.labels:
        return space.labels.index(str(ref))
    return space.index(ref)


_BUILDERS = {
    "rates": _from_rates,
    "hamiltonian": _from_hamiltonian,
    "cycles": _from_cycles,
    "torus": _from_torus,
}


def bundle_from_document(doc: ModelDocument, source: Optional[Path] = None) -> ModelBundle:
    bundle = dataclasses.replace(_BUILDERS[doc.kind](doc), source=source)  # type: ignore[operator]
    logger.debug("model bundle", extra={"extra_fields": bundle.describe()})
    return bundle


def b_matrix(bundle: ModelBundle, entries: Optional[Sequence[BEntrySpec]]) -> np.ndarray:
    """Increment b from explicit entries, or c* − c when none are given."""
    assert bundle.space is not None and bundle.generator is not None and bundle.mu0 is not None
    if entries is None:
        return adjoint_difference(bundle.generator, bundle.mu0)
    b = np.zeros((bundle.space.n, bundle.space.n))
    for entry in entries:
        b[_ref(bundle.space, entry.from_), _ref(bundle.space, entry.to)] = entry.value
    return b


def build_family(
    bundle: ModelBundle,
    kind: "FamilyKind | str",
    f: Observable,
    *,
    variant: str = "time_change",
    b: Optional[Sequence[BEntrySpec]] = None,
) -> PerturbationFamily:
    """The perturbation family of ``kind`` over the bundle's chain.

    Raises:
        ValidationError: the model kind cannot carry this family
        PerturbationError: construction failed (negative direction, unbalanced b, ...)
    """
    kind = FamilyKind.parse(kind)
    bundle.require_finite(f"family {kind.value}")
    assert bundle.generator is not None and bundle.mu0 is not None and bundle.space is not None
    L, mu0 = bundle.generator, bundle.mu0
    if kind is FamilyKind.TIME_CHANGE:
        return time_change_family(L, mu0, f)
    if kind is FamilyKind.LANGEVIN:
        return langevin_family(L, mu0, f)
    if kind is FamilyKind.GENERAL_B:
        return general_b_family(L, mu0, f, b_matrix(bundle, b), variant=variant)  # type: ignore[arg-type]
    if kind is FamilyKind.CYCLE:
        if not bundle.cycles:
            raise ValidationError("family Cycle needs a 'cycles' model")
        return cycle_family(bundle.space, mu0, bundle.cycles, f)
    if bundle.graph is None:
        raise ValidationError(f"family {kind.value} needs a 'hamiltonian' model")
    if kind is FamilyKind.METROPOLIS:
        return metropolis_family(bundle.graph, f)
    return glauber_family(bundle.graph, f)
