"""Green–Kubo identities for reversible chains."""

import numpy as np
import pytest

from fdtlab.app.config.tolerances import DEFAULT_TOLERANCES
from fdtlab.app.infra.errors import NotReversible
from fdtlab.app.markov.spectral import spectral_gap
from fdtlab.app.suite.covariance import covariance_s_derivative
from fdtlab.app.suite.green_kubo import (
    green_kubo,
    green_kubo_dissipation,
    integration_horizon,
)


def test_two_state_closed_form(two_state):
    # -<f Lf> = 1/2 <Γ(f,f)> = 2/3 for f = 1{0}
    L, mu = two_state
    f = np.array([1.0, 0.0])
    result = green_kubo(L, mu.weights, f, f)
    assert result.lhs == pytest.approx(2.0 / 3.0, abs=1e-14)
    assert result.middle == pytest.approx(2.0 / 3.0, abs=1e-14)
    assert result.rhs == pytest.approx(2.0 / 3.0, rel=1e-10)
    assert result.horizon == pytest.approx(50.0 / 3.0)
    assert result.residual <= result.tolerance


def test_random_reversible_chain(reversible_chain, rng):
    L, mu = reversible_chain
    f, g = rng.normal(size=L.n), rng.normal(size=L.n)
    result = green_kubo(L, mu.weights, f, g)
    report = result.report(DEFAULT_TOLERANCES, family="Langevin", n=L.n)
    assert report.all_passed, report.failures
    assert {r.check for r in report} == {"green_kubo", "green_kubo_identity"}
    assert result.tail < 1e-15


def test_short_horizon_widens_tolerance(reversible_chain, rng):
    L, mu = reversible_chain
    f, g = rng.normal(size=L.n), rng.normal(size=L.n)
    short = green_kubo(L, mu.weights, f, g, T_max=0.5 / spectral_gap(L))
    assert short.tail > 1e-3
    assert short.residual <= short.tolerance


def test_requires_reversibility(three_cycle):
    L, mu = three_cycle
    f = np.array([1.0, 0.0, 0.0])
    with pytest.raises(NotReversible):
        green_kubo(L, mu.weights, f, f)
    with pytest.raises(NotReversible):
        green_kubo_dissipation(L, mu.weights, f, f, 0.0, 1.0)


def test_dissipation_matches_covariance_derivative(reversible_chain, rng):
    L, mu = reversible_chain
    f, g = rng.normal(size=L.n), rng.normal(size=L.n)
    expected = covariance_s_derivative(mu.weights, L, f, g, 0.2, 0.9, "invariant")
    assert green_kubo_dissipation(L, mu.weights, f, g, 0.2, 0.9) == pytest.approx(
        expected, abs=1e-10
    )


def test_integration_horizon():
    assert integration_horizon(2.0) == pytest.approx(25.0)
    assert integration_horizon(0.0) == pytest.approx(50.0)
