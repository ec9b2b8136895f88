"""Estimators, Euler–Maruyama ensembles and path storage."""

import math

import numpy as np
import pytest

from fdtlab.app.diffusion.estimators import (
    EstimatorResult,
    Moments,
    combined_stderr,
    covariance_estimate,
    mean_estimate,
    variance_estimate,
)
from fdtlab.app.diffusion.fourier import FourierSeries
from fdtlab.app.diffusion.model import TWO_PI, TorusModel
from fdtlab.app.diffusion.paths_io import read_paths_binary, write_paths_binary
from fdtlab.app.diffusion.simulate import (
    EnsembleParams,
    block_sizes,
    check_stability,
    simulate,
    stationary_sampler,
)
from fdtlab.app.infra.errors import InfraError, SimulationError, UnstableStep


class TestEstimators:
    def test_mean(self):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        est = mean_estimate(x)
        assert est.estimate == 2.5
        assert est.stderr == pytest.approx(np.std(x, ddof=1) / 2.0)
        assert est.n_effective == 4

    def test_covariance(self):
        a = np.array([1.0, 2.0, 3.0, 4.0])
        assert covariance_estimate(a, 2 * a).estimate == pytest.approx(2.5)
        assert variance_estimate(a).estimate == pytest.approx(1.25)

    def test_single_sample(self):
        assert mean_estimate(np.array([3.0])).stderr == math.inf

    def test_z_score(self):
        assert EstimatorResult(1.0, 0.5, 10).z_score(0.0) == 2.0
        assert EstimatorResult(1.0, 0.0, 10).z_score(1.0) == 0.0
        assert EstimatorResult(1.0, 0.0, 10).z_score(2.0) == math.inf

    def test_combined_stderr(self):
        assert combined_stderr(EstimatorResult(0, 3.0, 1), EstimatorResult(0, 4.0, 1)) == 5.0

    def test_moments_merge_matches_pooled(self, rng):
        x = rng.normal(size=1000)
        parts = [Moments.of(chunk) for chunk in np.array_split(x, 7)]
        pooled = Moments.merge_all(parts)
        assert pooled.count == 1000
        assert pooled.mean == pytest.approx(x.mean(), abs=1e-12)
        assert pooled.variance == pytest.approx(x.var(ddof=1), rel=1e-10)
        assert pooled.result().stderr == pytest.approx(mean_estimate(x).stderr, rel=1e-10)

    def test_empty_moments(self):
        assert Moments.of(np.array([])) == Moments()
        assert Moments().merge(Moments.of(np.array([2.0]))).mean == 2.0
        assert math.isnan(Moments.of(np.array([2.0])).variance)


class TestEnsembleParams:
    @pytest.mark.parametrize("kwargs", [
        {"n_paths": 0, "dt": 0.1, "T": 1.0},
        {"n_paths": 10, "dt": 0.0, "T": 1.0},
        {"n_paths": 10, "dt": 0.1, "T": -1.0},
        {"n_paths": 10, "dt": 0.1, "T": 1.0, "stride": 0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(SimulationError):
            EnsembleParams(**kwargs)

    def test_off_grid(self):
        with pytest.raises(SimulationError) as exc:
            EnsembleParams(10, 0.1, 0.25)
        assert exc.value.code == "OFF_GRID"
        with pytest.raises(SimulationError):
            EnsembleParams(10, 0.1, 1.0, record_times=(0.35,))

    def test_steps(self):
        params = EnsembleParams(10, 0.01, 1.0)
        assert params.n_steps == 100
        assert params.step_of(0.3) == 30
        assert params.with_dt(0.02).n_steps == 50

    def test_block_sizes(self):
        assert block_sizes(10, 4) == [4, 4, 2]
        assert block_sizes(8, 4) == [4, 4]


class TestSimulate:
    def test_stability_guard(self, torus):
        assert check_stability(torus, 0.0, 0.01) == pytest.approx(torus.drift_sup())
        with pytest.raises(UnstableStep):
            check_stability(torus, 0.0, 0.2)
        with pytest.raises(UnstableStep):
            simulate(torus, 0.0, EnsembleParams(10, 0.2, 1.0))

    def test_negative_delta(self, torus):
        with pytest.raises(SimulationError) as exc:
            simulate(torus, -0.1, EnsembleParams(10, 0.01, 0.1))
        assert exc.value.code == "NEGATIVE_DELTA"

    def test_thread_and_block_independence(self, torus):
        params = EnsembleParams(200, 0.01, 0.1, seed=3, block_paths=64, threads=1)
        one = simulate(torus, 0.1, params)
        many = simulate(torus, 0.1, EnsembleParams(200, 0.01, 0.1, seed=3, block_paths=64,
                                                   threads=3))
        np.testing.assert_array_equal(one.final, many.final)
        np.testing.assert_array_equal(one.displacement, many.displacement)

    def test_common_random_numbers(self, torus):
        params = EnsembleParams(100, 0.01, 0.1, seed=9, block_paths=50)
        base = simulate(torus, 0.0, params)
        bumped = simulate(torus, 0.05, params)
        np.testing.assert_array_equal(base.initial, bumped.initial)
        assert 0 < np.max(np.abs(base.displacement - bumped.displacement)) < 0.05

    def test_recorded_positions(self, torus):
        params = EnsembleParams(50, 0.01, 0.1, x0=1.0, record_times=(0.05,))
        ens = simulate(torus, 0.0, params)
        np.testing.assert_allclose(ens.positions_at(0.0), 1.0)
        assert ens.positions_at(0.05).shape == (50,)
        assert ens.positions_at(0.1) is ens.final
        with pytest.raises(SimulationError) as exc:
            ens.positions_at(0.03)
        assert exc.value.code == "NOT_RECORDED"
        assert np.all((ens.final >= 0) & (ens.final < TWO_PI))

    def test_stride(self, torus):
        ens = simulate(torus, 0.0, EnsembleParams(20, 0.01, 0.1, stride=5))
        assert ens.paths.shape == (20, 3)
        assert ens.path_dt == pytest.approx(0.05)
        np.testing.assert_array_equal(ens.paths[:, -1], ens.final)

    def test_stationary_sampler(self):
        flat = stationary_sampler(TorusModel(H=FourierSeries.zero()), grid=1000)
        np.testing.assert_allclose(flat(np.array([0.0, 0.25, 1.0])), [0.0, TWO_PI / 4, TWO_PI],
                                   atol=1e-9)


class TestPathsIO:
    def test_round_trip(self, torus, tmp_path):
        ens = simulate(torus, 0.0, EnsembleParams(8, 0.01, 0.04, stride=2))
        target = tmp_path / "paths" / "run.bin"
        write_paths_binary(target, ens)
        paths, dt = read_paths_binary(target)
        np.testing.assert_array_equal(paths, ens.paths)
        assert dt == pytest.approx(0.02)
        assert target.stat().st_size == 24 + 8 * 3 * 8

    def test_requires_stride(self, torus, tmp_path):
        ens = simulate(torus, 0.0, EnsembleParams(8, 0.01, 0.04))
        with pytest.raises(SimulationError) as exc:
            write_paths_binary(tmp_path / "run.bin", ens)
        assert exc.value.code == "NO_PATHS"

    def test_truncated(self, torus, tmp_path):
        ens = simulate(torus, 0.0, EnsembleParams(8, 0.01, 0.04, stride=2))
        target = tmp_path / "run.bin"
        write_paths_binary(target, ens)
        target.write_bytes(target.read_bytes()[:-8])
        with pytest.raises(InfraError):
            read_paths_binary(target)
        target.write_bytes(b"\x00" * 4)
        with pytest.raises(InfraError):
            read_paths_binary(target)
