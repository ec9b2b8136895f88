"""Randomized invariants of the Markov layer over seeded random chains."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from fdtlab.app.markov.adjoint import adjoint_matrix, reversibility_residual, symmetrize
from fdtlab.app.markov.invariant import invariance_residual, invariant_measure
from fdtlab.app.markov.semigroup import Uniformized
from fdtlab.app.perturb.builders import random_generator

chains = st.tuples(st.integers(min_value=2, max_value=12), st.integers(min_value=0, max_value=2**31))


def _chain(n, seed, reversible=False):
    rng = np.random.default_rng(seed)
    L = random_generator(rng, n, reversible=reversible)
    return L, invariant_measure(L), rng


@settings(max_examples=25, deadline=None)
@given(chains)
def test_invariant_measure_is_positive_and_balanced(case):
    L, mu, _ = _chain(*case)
    assert np.all(mu.weights > 0)
    assert invariance_residual(L, mu) < 1e-11


@settings(max_examples=25, deadline=None)
@given(chains)
def test_adjoint_is_a_generator_with_the_same_invariant_measure(case):
    L, mu, _ = _chain(*case)
    L_star = adjoint_matrix(L, mu)
    off = L_star - np.diag(np.diag(L_star))
    assert np.all(off >= 0)
    np.testing.assert_allclose(L_star.sum(axis=1), 0.0, atol=1e-10)
    assert invariance_residual(L_star, mu) < 1e-10


@settings(max_examples=25, deadline=None)
@given(chains)
def test_symmetrized_generator_is_reversible(case):
    L, mu, _ = _chain(*case)
    assert reversibility_residual(symmetrize(L, mu), mu) < 1e-10


@settings(max_examples=25, deadline=None)
@given(chains)
def test_reversible_builder(case):
    L, mu, _ = _chain(*case, reversible=True)
    assert reversibility_residual(L, mu) < 1e-11


@settings(max_examples=25, deadline=None)
@given(chains, st.floats(min_value=0.0, max_value=5.0), st.floats(min_value=0.0, max_value=5.0))
def test_semigroup_is_a_contraction_and_composes(case, s, t):
    L, _, rng = _chain(*case)
    g = rng.normal(size=L.n)
    U = Uniformized.of(L)
    composed = U.apply(s, U.apply(t, g))
    np.testing.assert_allclose(composed, U.apply(s + t, g), atol=1e-10)
    assert np.max(np.abs(U.apply(t, g))) <= np.max(np.abs(g)) + 1e-12


@settings(max_examples=25, deadline=None)
@given(chains, st.floats(min_value=0.0, max_value=10.0))
def test_evolved_law_stays_a_probability(case, t):
    L, _, _ = _chain(*case)
    nu = np.zeros(L.n)
    nu[0] = 1.0
    law = Uniformized.of(L).apply_left(t, nu)
    assert np.all(law >= -1e-15)
    assert abs(law.sum() - 1.0) < 1e-12
