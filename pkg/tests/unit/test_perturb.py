"""Perturbation families: rates, kernels, caps and invariance of e^{δf}∘μ⁰."""

import math

import numpy as np
import pytest

from fdtlab.app.infra.errors import (
    BalanceViolation,
    DeltaTooLarge,
    Disconnected,
    EmptyGrid,
    MalformedCycle,
    NegativeAlpha,
    NegativeDirection,
    PerturbationError,
    UnboundedBelow,
)
from fdtlab.app.markov.adjoint import reversibility_residual
from fdtlab.app.markov.generator import ring_generator
from fdtlab.app.markov.invariant import invariance_residual
from fdtlab.app.markov.types import Measure, Observable, StateSpace
from fdtlab.app.perturb.builders import random_b, random_family
from fdtlab.app.perturb.cycles import build_cycles, cycle_family, normalize_cycle
from fdtlab.app.perturb.family import (
    FamilyKind,
    ResponseKernel,
    corrupt_kernel,
    shift_to_nonnegative,
)
from fdtlab.app.perturb.general_b import (
    adjoint_difference,
    balance_residual,
    general_b_family,
    lower_bound_ratio,
)
from fdtlab.app.perturb.gibbs import (
    HamiltonianGraph,
    glauber_family,
    glauber_rates,
    metropolis_family,
)
from fdtlab.app.perturb.langevin import (
    langevin_family,
    langevin_symmetric_action,
    symmetric_tilt_generator,
)
from fdtlab.app.perturb.time_change import time_change_family
from fdtlab.app.perturb.verify import kernel_row_sum_residual, verify_family

ALL_KINDS = [kind.value for kind in FamilyKind]


class TestFamilyKind:
    @pytest.mark.parametrize("text,kind", [
        ("TimeChange", FamilyKind.TIME_CHANGE),
        ("time_change", FamilyKind.TIME_CHANGE),
        ("general-b", FamilyKind.GENERAL_B),
        ("glauber", FamilyKind.GLAUBER),
    ])
    def test_parse(self, text, kind):
        assert FamilyKind.parse(text) is kind

    def test_unknown(self):
        with pytest.raises(PerturbationError) as info:
            FamilyKind.parse("Boltzmann")
        assert info.value.code == "UNKNOWN_FAMILY"
        assert "Langevin" in info.value.details["known"]


class TestKernelMatchesRates:
    """A_f is the δ-derivative of the perturbed rates at δ = 0."""

    @pytest.mark.parametrize("kind", ["TimeChange", "Langevin", "GeneralB", "Cycle", "Glauber"])
    def test_smooth_families(self, kind):
        fam = random_family(np.random.default_rng(7), kind, 6)
        h = 1e-6
        # second-order one-sided difference
        derivative = (-3 * fam.base.offdiag + 4 * fam.rates_fn(h) - fam.rates_fn(2 * h)) / (2 * h)
        np.fill_diagonal(derivative, 0.0)
        np.testing.assert_allclose(derivative, fam.kernel.offdiag, atol=1e-6)

    def test_metropolis_one_sided_tie(self):
        space = StateSpace.of_size(3)
        hg = HamiltonianGraph.build(space, [(0, 1), (1, 2)], np.array([0.0, 0.0, 1.0]))
        f = Observable(space, [1.0, 0.0, 0.0])
        forward = metropolis_family(hg, f)
        backward = metropolis_family(hg, Observable(space, -f.values))
        assert forward.kernel.matrix[0, 1] == pytest.approx(-1.0)
        assert backward.kernel.matrix[0, 1] == 0.0
        assert forward.kernel.matrix[1, 0] == 0.0
        h = 1e-7
        assert (forward.rates_fn(h)[0, 1] - 1.0) / h == pytest.approx(-1.0, abs=1e-6)


class TestInvariance:
    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_verify_family_passes(self, kind):
        fam = random_family(np.random.default_rng(3), kind, 5)
        report = verify_family(fam, [0.01, 0.1, 0.5])
        assert report.all_passed, report.failures
        assert report.by_check("kernel_row_sum")
        assert len(report.by_check("family_invariance")) == 3

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_kernel_rows_sum_to_zero(self, kind):
        fam = random_family(np.random.default_rng(11), kind, 8)
        assert kernel_row_sum_residual(fam) < 1e-12 * max(1.0, np.max(np.abs(fam.kernel.matrix)))

    def test_reversibility_rows_only_for_symmetric(self, two_state, three_cycle):
        L, mu = two_state
        symmetric = langevin_family(L, mu, Observable(L.space, [0.3, -0.2]))
        assert symmetric.symmetric
        assert verify_family(symmetric, [0.5]).by_check("family_reversibility")
        L, mu = three_cycle
        plain = time_change_family(L, mu, Observable(L.space, [1.0, 0.0, -1.0]))
        assert not verify_family(plain, [0.5]).by_check("family_reversibility")

    def test_empty_grid(self, two_state):
        L, mu = two_state
        fam = time_change_family(L, mu, Observable(L.space, [1.0, 0.0]))
        with pytest.raises(EmptyGrid):
            verify_family(fam, [])

    def test_delta_zero_is_base(self, two_state):
        L, mu = two_state
        fam = time_change_family(L, mu, Observable(L.space, [1.0, 0.0]))
        assert fam.generator_at(0.0) is L


class TestTimeChange:
    def test_rates_and_kernel(self, three_cycle):
        L, mu = three_cycle
        f = Observable(L.space, [1.0, 0.0, -1.0])
        fam = time_change_family(L, mu, f)
        assert fam.delta_cap == math.inf
        assert not fam.symmetric
        np.testing.assert_allclose(fam.generator_at(2.0).rates[0], math.exp(-2.0) * L.rates[0])
        np.testing.assert_allclose(fam.kernel.matrix, -f.values[:, None] * L.rates)

    def test_scaled_rebuilds_direction(self, two_state):
        L, mu = two_state
        fam = time_change_family(L, mu, Observable(L.space, [1.0, 0.0]))
        np.testing.assert_allclose(fam.scaled(-2.0).kernel.matrix, -2.0 * fam.kernel.matrix)


class TestLangevin:
    def test_negative_direction_on_nonreversible_base(self, three_cycle):
        L, mu = three_cycle
        with pytest.raises(NegativeDirection):
            langevin_family(L, mu, Observable(L.space, [1.0, -0.5, 0.0]))

    def test_nonnegative_direction_on_nonreversible_base(self, three_cycle):
        L, mu = three_cycle
        fam = langevin_family(L, mu, Observable(L.space, [1.0, 0.5, 0.0]))
        assert not fam.symmetric
        assert verify_family(fam, [0.2, 1.0, 3.0]).all_passed

    def test_reversible_kernel_is_half_carre_du_champ(self, reversible_chain, rng):
        L, mu = reversible_chain
        f = Observable(L.space, rng.normal(size=L.n))
        g = rng.normal(size=L.n)
        fam = langevin_family(L, mu, f)
        expected = 0.5 * (L.apply(f.values * g) - f.values * L.apply(g) - g * L.apply(f.values))
        np.testing.assert_allclose(fam.kernel.apply(g), expected, atol=1e-12)

    def test_symmetric_action_is_unit_delta_generator(self, reversible_chain, rng):
        L, mu = reversible_chain
        f = Observable(L.space, rng.normal(size=L.n))
        g = rng.normal(size=L.n)
        fam = langevin_family(L, mu, f)
        np.testing.assert_allclose(
            langevin_symmetric_action(L, f, g), fam.generator_at(1.0).apply(g), atol=1e-12
        )

    def test_symmetric_tilt_is_reversible_for_tilted_measure(self, random_chain, rng):
        L, mu = random_chain
        f = shift_to_nonnegative(Observable(L.space, rng.normal(size=L.n)))
        tilt = symmetric_tilt_generator(L, mu, f)
        assert reversibility_residual(tilt, mu.tilt(f)) < 1e-10

    def test_symmetric_tilt_needs_nonnegative_direction(self, random_chain):
        L, mu = random_chain
        with pytest.raises(NegativeDirection):
            symmetric_tilt_generator(L, mu, Observable(L.space, -np.ones(L.n)))


class TestGeneralB:
    def test_cap_from_lower_bound(self, random_chain):
        L, mu = random_chain
        fam = general_b_family(L, mu, Observable(L.space, np.ones(L.n)), -0.5 * L.offdiag)
        assert fam.params["rho"] == pytest.approx(0.5)
        assert fam.delta_cap == pytest.approx(2.0)
        fam.generator_at(2.0)
        with pytest.raises(DeltaTooLarge) as info:
            fam.generator_at(2.5)
        assert info.value.details["cap"] == pytest.approx(2.0)

    def test_balance_violation(self, two_state):
        L, mu = two_state
        b = np.array([[0.0, 1.0], [0.0, 0.0]])
        assert balance_residual(mu, b) > 0.1
        with pytest.raises(BalanceViolation):
            general_b_family(L, mu, Observable(L.space, [1.0, 0.0]), b)

    def test_unbounded_below(self):
        L = ring_generator(3, 1.0, 0.0)
        mu = Measure.uniform(L.space)
        b = np.zeros((3, 3))
        b[1, 0] = b[2, 1] = b[0, 2] = -0.1
        with pytest.raises(UnboundedBelow):
            lower_bound_ratio(L.offdiag, b)
        with pytest.raises(UnboundedBelow):
            general_b_family(L, mu, Observable(L.space, [1.0, 0.0, 0.0]), b)

    def test_balance_checked_before_lower_bound(self):
        L = ring_generator(3, 1.0, 0.0)
        b = np.zeros((3, 3))
        b[1, 0] = -0.1
        with pytest.raises(BalanceViolation):
            general_b_family(L, Measure.uniform(L.space), Observable(L.space, [1.0, 0.0, 0.0]), b)

    def test_bad_shape(self, two_state):
        L, mu = two_state
        with pytest.raises(PerturbationError):
            general_b_family(L, mu, Observable(L.space, [1.0, 0.0]), np.zeros((3, 3)))

    def test_adjoint_difference_is_balanced(self, random_chain):
        L, mu = random_chain
        b = adjoint_difference(L, mu)
        assert balance_residual(mu, b) < 1e-12
        assert lower_bound_ratio(L.offdiag, b) <= 1.0 + 1e-12

    def test_langevin_variant_shares_kernel(self, random_chain, rng):
        L, mu = random_chain
        f = shift_to_nonnegative(Observable(L.space, rng.normal(size=L.n)))
        b = random_b(rng, L, mu)
        plain = general_b_family(L, mu, f, b)
        langevin = general_b_family(L, mu, f, b, variant="langevin")
        np.testing.assert_allclose(plain.kernel.matrix, langevin.kernel.matrix)
        assert verify_family(langevin, [0.05, 0.2]).all_passed

    def test_unknown_variant(self, random_chain):
        L, mu = random_chain
        with pytest.raises(PerturbationError):
            general_b_family(L, mu, Observable(L.space, np.ones(L.n)), np.zeros((L.n, L.n)),
                             variant="metropolis")


class TestCycles:
    def test_normalize_drops_closing_state(self):
        assert normalize_cycle(StateSpace.of_size(3), [0, 1, 2, 0]) == (0, 1, 2)

    @pytest.mark.parametrize("states", [[], [0], [1, 1], [0, 1, 1]])
    def test_malformed(self, states):
        with pytest.raises(MalformedCycle):
            normalize_cycle(StateSpace.of_size(3), states)

    def test_negative_alpha(self):
        with pytest.raises(NegativeAlpha):
            build_cycles(StateSpace.of_size(3), [([0, 1, 2], -1.0, 0.0)])

    def test_cap_and_invariance(self):
        space = StateSpace.of_size(3)
        mu = Measure.probability(space, [0.2, 0.3, 0.5])
        cycles = build_cycles(space, [([0, 1, 2, 0], 1.0, -0.5), ([0, 2], 0.5, 0.25)])
        fam = cycle_family(space, mu, cycles, Observable(space, [0.5, -1.0, 0.0]))
        assert fam.delta_cap == pytest.approx(2.0)
        assert not fam.symmetric
        assert invariance_residual(fam.base, mu) < 1e-12
        assert verify_family(fam, [0.5, 2.0]).all_passed
        with pytest.raises(DeltaTooLarge):
            fam.generator_at(2.01)

    def test_two_state_cycles_are_symmetric(self):
        space = StateSpace.of_size(3)
        mu = Measure.probability(space, [0.2, 0.3, 0.5])
        cycles = build_cycles(space, [([0, 1], 1.0, 0.2), ([1, 2], 1.0, 0.1)])
        fam = cycle_family(space, mu, cycles, Observable(space, [1.0, 0.0, 0.5]))
        assert fam.symmetric
        report = verify_family(fam, [0.3, 1.0])
        assert report.all_passed
        assert len(report.by_check("family_reversibility")) == 2

    def test_scaled_moves_beta(self):
        space = StateSpace.of_size(3)
        mu = Measure.uniform(space)
        cycles = build_cycles(space, [([0, 1, 2], 1.0, 0.4)])
        f = Observable(space, [1.0, 0.0, 0.0])
        fam = cycle_family(space, mu, cycles, f)
        np.testing.assert_allclose(fam.scaled(2.0).kernel.matrix, 2.0 * fam.kernel.matrix)


class TestGibbs:
    def test_disconnected(self):
        space = StateSpace.of_size(4)
        hg = HamiltonianGraph.build(space, [(0, 1), (2, 3)], np.zeros(4))
        with pytest.raises(Disconnected):
            metropolis_family(hg, Observable(space, np.ones(4)))
        with pytest.raises(Disconnected):
            glauber_family(hg, Observable(space, np.ones(4)))

    def test_glauber_rates_closed_form(self):
        adjacency = np.ones((3, 3), dtype=bool)
        np.fill_diagonal(adjacency, False)
        h = np.array([0.0, 2.5, -40.0])
        rates = glauber_rates(adjacency, h)
        for x in range(3):
            for y in range(3):
                if x != y:
                    expected = 1.0 / (1.0 + math.exp(h[y] - h[x]))
                    assert rates[x, y] == pytest.approx(expected, rel=1e-14, abs=1e-300)

    @pytest.mark.parametrize("build", [metropolis_family, glauber_family])
    def test_families_are_reversible(self, build, rng):
        space = StateSpace.of_size(5)
        edges = [(x, (x + 1) % 5) for x in range(5)] + [(0, 2)]
        hg = HamiltonianGraph.build(space, edges, rng.normal(size=5))
        fam = build(hg, Observable(space, rng.normal(size=5)))
        assert fam.symmetric
        assert verify_family(fam, [0.1, 1.0, 4.0]).all_passed
        assert fam.mu0.weights == pytest.approx(hg.gibbs_measure().weights)


class TestKernelEdits:
    def test_corrupt_kernel(self, two_state):
        L, mu = two_state
        fam = time_change_family(L, mu, Observable(L.space, [1.0, 0.0]))
        bad = corrupt_kernel(fam, 0, 1, 1e-3)
        assert bad.kernel.matrix[0, 1] == pytest.approx(fam.kernel.matrix[0, 1] + 1e-3)
        assert bad.kernel.matrix.sum(axis=1) == pytest.approx([0.0, 0.0])
        assert bad.params["corrupted"] == {"x": 0, "y": 1, "eps": 1e-3}
        with pytest.raises(PerturbationError):
            bad.scaled(2.0)

    def test_corrupt_diagonal(self, two_state):
        L, mu = two_state
        fam = time_change_family(L, mu, Observable(L.space, [1.0, 0.0]))
        with pytest.raises(PerturbationError) as info:
            corrupt_kernel(fam, 1, 1, 1e-3)
        assert info.value.code == "SELF_LOOP"

    def test_kernel_rows_enforced(self):
        with pytest.raises(PerturbationError):
            ResponseKernel(StateSpace.of_size(2), np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_shift_to_nonnegative(self):
        space = StateSpace.of_size(3)
        shifted = shift_to_nonnegative(Observable(space, [-1.0, 2.0, 0.5]))
        np.testing.assert_allclose(shifted.values, [0.0, 3.0, 1.5])
