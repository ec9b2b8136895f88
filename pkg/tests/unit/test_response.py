"""Response functions, Duhamel integrals and finite-difference δ sweeps."""

import math

import numpy as np
import pytest

from fdtlab.app.infra.errors import BadTimes, DeltaTooLarge, EmptyGrid, PerturbationError
from fdtlab.app.markov.semigroup import Uniformized
from fdtlab.app.markov.types import Observable
from fdtlab.app.perturb.builders import random_family
from fdtlab.app.perturb.general_b import general_b_family
from fdtlab.app.perturb.langevin import langevin_family
from fdtlab.app.perturb.time_change import time_change_family
from fdtlab.app.response.convergence import (
    delta_sweep,
    dyadic_deltas,
    fit_loglog_slope,
    is_monotone_decreasing,
    kernel_norm_convergence,
    kernel_residual,
)
from fdtlab.app.response.finite_difference import (
    family_norm,
    finite_difference_response,
    windowed_response_check,
)
from fdtlab.app.response.function import (
    check_times,
    convolution_integral,
    response_expectation,
    response_function,
    response_integral,
    simpson_response_integral,
)


@pytest.fixture
def time_change(two_state):
    L, mu = two_state
    return L, time_change_family(L, mu, Observable(L.space, [1.0, -0.5]))


class TestHelpers:
    def test_dyadic_grid(self):
        grid = dyadic_deltas()
        assert len(grid) == 8
        assert grid[0] == 0.125
        assert grid[-1] == 2.0**-10
        assert dyadic_deltas(1, 2) == [0.5, 0.25]

    def test_slope_fit(self):
        assert fit_loglog_slope([1.0, 2.0, 4.0], [1.0, 4.0, 16.0]) == pytest.approx(2.0)
        assert fit_loglog_slope([1.0, 2.0, 4.0], [3.0, 3.0, 3.0]) == pytest.approx(0.0, abs=1e-12)

    def test_slope_skips_roundoff(self):
        assert fit_loglog_slope([1.0, 2.0, 4.0], [1e-14, 2.0, 4.0]) == pytest.approx(1.0)
        assert math.isnan(fit_loglog_slope([1.0, 2.0], [1e-14, 2.0]))
        assert math.isnan(fit_loglog_slope([], []))

    @pytest.mark.parametrize("values,expected", [
        ([1.0, 0.5, 0.25], True),
        ([1.0, 0.5, 0.51], True),
        ([1.0, 0.5, 0.6], False),
        ([1.0, 1e-12, 5e-12], True),
        ([], True),
    ])
    def test_monotone(self, values, expected):
        assert is_monotone_decreasing(values) is expected

    @pytest.mark.parametrize("s,t", [(-0.1, 1.0), (2.0, 1.0), (0.0, math.inf), (math.nan, 1.0)])
    def test_bad_times(self, s, t):
        with pytest.raises(BadTimes):
            check_times(s, t)

    def test_family_norm(self, two_state, time_change):
        L, mu = two_state
        assert family_norm(time_change[1]) == "sup"
        assert family_norm(langevin_family(L, mu, Observable(L.space, [1.0, 0.0]))) == "l2"


class TestResponseFunction:
    def test_endpoints(self, time_change):
        L, fam = time_change
        g = np.array([0.3, 1.2])
        U = Uniformized.of(L)
        A = fam.kernel.matrix
        np.testing.assert_allclose(response_function(L, fam, g, 0.0, 1.5).values,
                                   A @ U.apply(1.5, g), atol=1e-14)
        np.testing.assert_allclose(response_function(L, fam, g, 1.5, 1.5).values,
                                   U.apply(1.5, A @ g), atol=1e-14)

    def test_expectation_is_dot_product(self, random_chain, rng):
        L, mu = random_chain
        fam = time_change_family(L, mu, Observable(L.space, rng.normal(size=L.n)))
        g = rng.normal(size=L.n)
        nu = rng.dirichlet(np.ones(L.n))
        R = response_function(L, fam, g, 0.4, 1.1)
        assert response_expectation(nu, L, fam, g, 0.4, 1.1) == pytest.approx(nu @ R.values)

    def test_s_after_t_rejected(self, time_change):
        L, fam = time_change
        with pytest.raises(BadTimes):
            response_function(L, fam, np.ones(2), 2.0, 1.0)

    def test_constants_have_no_response(self, random_chain, rng):
        L, mu = random_chain
        fam = time_change_family(L, mu, Observable(L.space, rng.normal(size=L.n)))
        R = response_function(L, fam, np.ones(L.n), 0.2, 0.9)
        np.testing.assert_allclose(R.values, 0.0, atol=1e-12)


class TestIntegrals:
    def test_eigenvector_closed_form(self, two_state):
        # g - <g> is an eigenvector of eigenvalue -3 for the two-state chain
        L, _ = two_state
        g = np.array([1.0, -2.0])
        t = 0.8
        got = convolution_integral(L, np.eye(2), g, t, L_right=np.zeros((2, 2)))
        np.testing.assert_allclose(got, (1.0 - math.exp(-3.0 * t)) / 3.0 * g, atol=1e-13)

    def test_simpson_agrees_with_exact(self, random_chain, rng):
        L, mu = random_chain
        fam = time_change_family(L, mu, Observable(L.space, rng.normal(size=L.n)))
        g = rng.normal(size=L.n)
        exact = response_integral(L, fam, g, 2.0).values
        quadrature = simpson_response_integral(L, fam.kernel.matrix, g, 2.0, panels=1024)
        np.testing.assert_allclose(quadrature, exact, atol=1e-6)

    def test_simpson_pads_odd_panels(self, time_change):
        L, fam = time_change
        g = np.array([1.0, 0.0])
        odd = simpson_response_integral(L, fam.kernel.matrix, g, 1.0, panels=63)
        even = simpson_response_integral(L, fam.kernel.matrix, g, 1.0, panels=64)
        np.testing.assert_allclose(odd, even, atol=1e-15)

    def test_zero_horizon(self, time_change):
        L, fam = time_change
        np.testing.assert_array_equal(response_integral(L, fam, np.ones(2), 0.0).values, 0.0)
        np.testing.assert_array_equal(
            simpson_response_integral(L, fam.kernel.matrix, np.ones(2), 0.0), 0.0
        )


class TestFiniteDifference:
    def test_eta_shrinks_linearly(self, time_change):
        L, fam = time_change
        g = np.array([0.0, 1.0])
        coarse = finite_difference_response(L, fam, g, 1.0, 1e-2)
        fine = finite_difference_response(L, fam, g, 1.0, 1e-3)
        assert fine.eta < coarse.eta
        assert fine.eta / coarse.eta == pytest.approx(0.1, rel=0.2)
        assert fine.norm == "sup"

    def test_windowed_matches_direct(self, random_chain, rng):
        L, mu = random_chain
        fam = time_change_family(L, mu, Observable(L.space, rng.normal(size=L.n)))
        g = rng.normal(size=L.n)
        delta, a, b, t = 1e-5, 0.3, 0.5, 1.0
        result = windowed_response_check(L, fam, g, a, b, t, delta)
        U, U_delta = Uniformized.of(L), Uniformized.of(fam.generator_at(delta))
        direct = U.apply(a, (U_delta.apply(t, U.apply(b, g)) - U.apply(t + b, g)) / delta)
        np.testing.assert_allclose(result.values, direct, atol=1e-8)
        assert result.eta < 1e-3

    def test_zero_delta(self, time_change):
        L, fam = time_change
        with pytest.raises(PerturbationError) as info:
            finite_difference_response(L, fam, np.ones(2), 1.0, 0.0)
        assert info.value.code == "ZERO_DELTA"

    def test_delta_beyond_cap(self, random_chain):
        L, mu = random_chain
        fam = general_b_family(L, mu, Observable(L.space, np.ones(L.n)), -0.5 * L.offdiag)
        with pytest.raises(DeltaTooLarge):
            finite_difference_response(L, fam, np.ones(L.n), 1.0, 3.0)

    def test_zero_window_has_zero_eta(self, time_change):
        L, fam = time_change
        result = windowed_response_check(L, fam, np.array([1.0, 0.0]), 0.0, 0.0, 0.0, 0.1)
        assert result.eta == 0.0


class TestSweeps:
    def test_time_change_sweep(self, time_change):
        L, fam = time_change
        sweep = delta_sweep(L, fam, np.array([0.0, 1.0]), 1.0)
        assert sweep.deltas == tuple(dyadic_deltas())
        assert sweep.slope == pytest.approx(1.0, abs=0.1)
        assert sweep.monotone
        assert sweep.norm == "sup"
        assert len(sweep.rows()) == 8
        assert sweep.params["kind"] == "TimeChange"

    def test_sweep_sorts_and_deduplicates(self, time_change):
        L, fam = time_change
        sweep = delta_sweep(L, fam, np.ones(2), 1.0, [0.01, 0.1, 0.01])
        assert sweep.deltas == (0.1, 0.01)

    def test_empty_sweep(self, time_change):
        L, fam = time_change
        with pytest.raises(EmptyGrid):
            delta_sweep(L, fam, np.ones(2), 1.0, [])
        with pytest.raises(EmptyGrid):
            kernel_norm_convergence(fam, [])

    @pytest.mark.parametrize("kind", ["TimeChange", "Langevin", "GeneralB", "Cycle", "Glauber"])
    def test_kernel_convergence_is_first_order(self, kind):
        fam = random_family(np.random.default_rng(5), kind, 5)
        result = kernel_norm_convergence(fam)
        assert result.slope == pytest.approx(1.0, abs=0.1)
        assert result.residuals[-1] < result.residuals[0]
        assert kernel_residual(fam, 2.0**-10) == result.residuals[-1]
