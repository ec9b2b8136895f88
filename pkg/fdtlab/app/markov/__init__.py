"""Exact finite-state CTMC engine."""

from .adjoint import adjoint, is_reversible, reversibility_residual, symmetrize
from .carre import carre_du_champ, carre_du_champ_matrix, carre_du_champ_values
from .generator import build_generator, ring_generator, two_state_generator
from .invariant import invariance_residual, invariant_measure, is_irreducible
from .norms import expectation, l2_norm, sup_norm, total_variation
from .semigroup import (
    Uniformized,
    evolve_measure,
    semigroup_apply,
    transition_matrix,
    uniformized_convolution,
)
from .spectral import spectral_gap
from .types import Generator, Measure, Observable, StateSpace, values_of

__all__ = [
    "Generator",
    "Measure",
    "Observable",
    "StateSpace",
    "Uniformized",
    "adjoint",
    "build_generator",
    "carre_du_champ",
    "carre_du_champ_matrix",
    "carre_du_champ_values",
    "evolve_measure",
    "expectation",
    "invariance_residual",
    "invariant_measure",
    "is_irreducible",
    "is_reversible",
    "l2_norm",
    "reversibility_residual",
    "ring_generator",
    "semigroup_apply",
    "spectral_gap",
    "sup_norm",
    "symmetrize",
    "total_variation",
    "transition_matrix",
    "two_state_generator",
    "uniformized_convolution",
    "values_of",
]
