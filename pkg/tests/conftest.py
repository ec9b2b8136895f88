"""Pytest configuration for fdtlab tests."""

import os
from pathlib import Path

import numpy as np
import pytest

from fdtlab.app.config.getter import set_config
from fdtlab.app.diffusion.fourier import FourierSeries
from fdtlab.app.diffusion.model import TorusModel
from fdtlab.app.markov.generator import build_generator, ring_generator, two_state_generator
from fdtlab.app.markov.invariant import invariant_measure
from fdtlab.app.markov.types import Measure, Observable, StateSpace
from fdtlab.app.perturb.builders import random_generator

REPO_ROOT = Path(__file__).resolve().parents[1]
ENV_VARS = ("FDT_LAB_THREADS", "FDT_LAB_SEED", "FDT_LAB_OUT_DIR")


@pytest.fixture(autouse=True)
def clean_config(monkeypatch):
    """Reset the config cache and drop FDT_LAB_* variables around every test."""
    set_config(None)
    for name in ENV_VARS:
        monkeypatch.delenv(name, raising=False)
    for name in [k for k in os.environ if k.startswith("FDT_LAB_TOL_")]:
        monkeypatch.delenv(name, raising=False)
    yield
    set_config(None)


@pytest.fixture
def repo_root():
    return REPO_ROOT


@pytest.fixture
def models_dir():
    return REPO_ROOT / "models"


@pytest.fixture
def runs_dir():
    return REPO_ROOT / "config" / "runs"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_state():
    """c(0,1) = 1, c(1,0) = 2; μ⁰ = (2/3, 1/3), gap 3."""
    L = two_state_generator(1.0, 2.0)
    return L, invariant_measure(L)


@pytest.fixture
def three_cycle():
    """Non-reversible rotation on three states with uniform μ⁰."""
    space = StateSpace.of_size(3)
    L = build_generator(space, [
        (0, 1, 2.0), (1, 2, 2.0), (2, 0, 2.0),
        (1, 0, 1.0), (2, 1, 1.0), (0, 2, 1.0),
    ])
    return L, Measure.uniform(space)


@pytest.fixture
def four_ring():
    L = ring_generator(4, 1.0, 0.5)
    return L, invariant_measure(L)


@pytest.fixture
def reversible_chain(rng):
    L = random_generator(rng, 6, reversible=True)
    return L, invariant_measure(L)


@pytest.fixture
def random_chain(rng):
    L = random_generator(rng, 7)
    return L, invariant_measure(L)


@pytest.fixture
def observable():
    def make(space, values):
        return Observable(space, np.asarray(values, dtype=float))
    return make


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    """Empty working directory with no config files or .env."""
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture
def torus():
    """H = ½cos x, ψ = 0.3, f = sin x (the shipped torus_cos model)."""
    return TorusModel(
        H=FourierSeries.from_real(0.0, cos=[0.5]),
        psi=0.3,
        f=FourierSeries.from_real(0.0, sin=[1.0]),
    )
