"""Euler–Maruyama path ensembles on the circle."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from fdtlab.app.config import constants
from fdtlab.app.config.getter import get_mc_config, get_runtime_config
from fdtlab.app.infra.errors import SimulationError, UnstableStep
from fdtlab.app.infra.logger import get_logger
from .model import TWO_PI, TorusModel

logger = get_logger(__name__)

_GRID_SLACK = 1e-9


@dataclass(frozen=True)
class EnsembleParams:
    """Ensemble size, step and horizon.

    ``x0=None`` starts from the unperturbed Gibbs law by stratified
    inverse-CDF sampling; a float starts every path there.
    """

    n_paths: int
    dt: float
    T: float
    seed: int = constants.SEED_DEFAULT
    stride: Optional[int] = None
    record_times: tuple[float, ...] = ()
    x0: Optional[float] = None
    block_paths: Optional[int] = None
    threads: Optional[int] = None

    def __post_init__(self) -> None:
        if self.n_paths < 1:
            raise SimulationError(f"n_paths must be positive, got {self.n_paths}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise SimulationError(f"dt must be positive, got {self.dt}")
        if self.T < 0:
            raise SimulationError(f"T must be nonnegative, got {self.T}")
        if abs(self.T / self.dt - round(self.T / self.dt)) > _GRID_SLACK * max(1.0, self.T / self.dt):
            raise SimulationError(f"T={self.T} is not a multiple of dt={self.dt}", code="OFF_GRID")
        if self.stride is not None and self.stride < 1:
            raise SimulationError(f"stride must be positive, got {self.stride}")
        for t in self.record_times:
            self.step_of(t)

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    def step_of(self, t: float) -> int:
        k = int(round(t / self.dt))
        if abs(t / self.dt - k) > _GRID_SLACK * max(1.0, abs(t / self.dt)) or not 0 <= k <= self.n_steps:
            raise SimulationError(f"time {t} is not a step of [0, {self.T}] with dt={self.dt}",
                                  code="OFF_GRID")
        return k

    def with_dt(self, dt: float) -> "EnsembleParams":
        return EnsembleParams(self.n_paths, dt, self.T, self.seed, self.stride, self.record_times,
                              self.x0, self.block_paths, self.threads)

    def resolved_block_paths(self) -> int:
        return int(self.block_paths or get_mc_config()["block_paths"])

    def resolved_threads(self) -> int:
        return max(1, int(self.threads or get_runtime_config()["threads"]))


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    params: EnsembleParams
    delta: float
    initial: np.ndarray
    final: np.ndarray
    displacement: np.ndarray
    snapshots: Dict[int, np.ndarray] = field(default_factory=dict)
    paths: Optional[np.ndarray] = None

    @property
    def n_paths(self) -> int:
        return self.params.n_paths

    @property
    def dt(self) -> float:
        return self.params.dt

    @property
    def T(self) -> float:
        return self.params.T

    @property
    def seed(self) -> int:
        return self.params.seed

    @property
    def path_dt(self) -> float:
        """Time between stored path columns."""
        return self.params.dt * (self.params.stride or 1)

    def positions_at(self, t: float) -> np.ndarray:
        step = self.params.step_of(t)
        if step == 0:
            return self.initial
        if step == self.params.n_steps:
            return self.final
        try:
            return self.snapshots[step]
        except KeyError as exc:
            raise SimulationError(f"time {t} was not recorded", code="NOT_RECORDED") from exc


def stationary_sampler(
    model: TorusModel, grid: Optional[int] = None
) -> Callable[[np.ndarray], np.ndarray]:
    """Inverse CDF of the unperturbed Gibbs law on a fine grid."""
    points = int(grid or get_mc_config()["inverse_cdf_grid"])
    x = np.linspace(0.0, TWO_PI, points + 1)
    cdf = cumulative_trapezoid(model.unnormalized_density(x), x, initial=0.0)
    cdf /= cdf[-1]

    def sample(u: np.ndarray) -> np.ndarray:
        return np.interp(u, cdf, x)

    return sample


def check_stability(model: TorusModel, delta: float, dt: float,
                    guard: float = constants.STABILITY_GUARD) -> float:
    """sup|b_δ|, after checking dt·sup|b_δ| < guard.

    Raises:
        UnstableStep
    """
    sup = model.drift_sup(delta)
    if dt * sup >= guard:
        raise UnstableStep(dt, sup)
    return sup


def block_sizes(n_paths: int, block: int) -> list[int]:
    full, rest = divmod(n_paths, block)
    return [block] * full + ([rest] if rest else [])


def _run_block(
    model: TorusModel,
    delta: float,
    params: EnsembleParams,
    size: int,
    seed: np.random.SeedSequence,
    sampler: Optional[Callable[[np.ndarray], np.ndarray]],
    record_steps: frozenset[int],
) -> tuple[np.ndarray, np.ndarray, Dict[int, np.ndarray], Optional[np.ndarray]]:
    rng = np.random.Generator(np.random.Philox(seed))
    if sampler is None:
        y = np.full(size, float(params.x0) % TWO_PI)
    else:
        y = sampler((np.arange(size) + rng.random(size)) / size)
    start = y.copy()
    scale = math.sqrt(2.0 * params.dt)
    snapshots: Dict[int, np.ndarray] = {}
    stride = params.stride
    kept = [np.mod(y, TWO_PI)] if stride else None
    for step in range(1, params.n_steps + 1):
        # drift is periodic, so the unwrapped position is used directly
        y = y + model.drift(y, delta) * params.dt + scale * rng.standard_normal(size)
        if step in record_steps:
            snapshots[step] = np.mod(y, TWO_PI)
        if kept is not None and step % stride == 0:
            kept.append(np.mod(y, TWO_PI))
    paths = np.stack(kept, axis=1) if kept is not None else None
    return start, y, snapshots, paths


def simulate(model: TorusModel, delta: float, params: EnsembleParams) -> PathEnsemble:
    """Euler–Maruyama ensemble for the δ-perturbed drift.

    Paths are split into fixed-size blocks, block i drawing from the i-th
    Philox stream spawned from ``params.seed``; the same seed therefore gives
    the same noise for every δ and every thread count.

    Raises:
        UnstableStep: dt·sup|b_δ| ≥ 0.1
        SimulationError: δ < 0
    """
    if not (delta >= 0 and math.isfinite(delta)):
        raise SimulationError(f"delta must be nonnegative, got {delta}", code="NEGATIVE_DELTA")
    sup = check_stability(model, delta, params.dt)
    sampler = stationary_sampler(model) if params.x0 is None else None
    record_steps = frozenset(params.step_of(t) for t in params.record_times)
    sizes = block_sizes(params.n_paths, params.resolved_block_paths())
    seeds = np.random.SeedSequence(params.seed).spawn(len(sizes))

    started = time.time()
    with ThreadPoolExecutor(max_workers=params.resolved_threads()) as pool:
        blocks = list(pool.map(
            lambda item: _run_block(model, delta, params, item[0], item[1], sampler, record_steps),
            zip(sizes, seeds),
        ))
    start = np.concatenate([b[0] for b in blocks])
    end = np.concatenate([b[1] for b in blocks])
    snapshots = {
        step: np.concatenate([b[2][step] for b in blocks]) for step in sorted(record_steps)
    }
    paths = np.concatenate([b[3] for b in blocks]) if params.stride else None
    logger.info(
        "simulated ensemble",
        extra={"extra_fields": {
            "n_paths": params.n_paths, "n_steps": params.n_steps, "dt": params.dt,
            "delta": delta, "blocks": len(sizes), "drift_sup": sup,
            "elapsed_seconds": round(time.time() - started, 3),
        }},
    )
    return PathEnsemble(
        params=params,
        delta=float(delta),
        initial=np.mod(start, TWO_PI),
        final=np.mod(end, TWO_PI),
        displacement=end - start,
        snapshots=snapshots,
        paths=paths,
    )
