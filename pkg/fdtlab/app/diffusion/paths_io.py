"""Flat binary storage of stored paths.

Layout (little-endian): header {n_paths: int64, n_steps: int64, dt: float64}
followed by n_paths × n_steps float64 positions in row-major order. ``dt`` is
the time between stored columns.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from fdtlab.app.infra.errors import InfraError, SimulationError
from .simulate import PathEnsemble

HEADER_DTYPE = np.dtype([("n_paths", "<i8"), ("n_steps", "<i8"), ("dt", "<f8")])
VALUE_DTYPE = np.dtype("<f8")


def write_paths_binary(path: Path, ensemble: PathEnsemble) -> None:
    """Atomically write the ensemble's stored paths.

    Raises:
        SimulationError: the ensemble kept no paths (run with a stride)
    """
    if ensemble.paths is None:
        raise SimulationError("ensemble has no stored paths; simulate with a stride",
                              code="NO_PATHS")
    paths = np.ascontiguousarray(ensemble.paths, dtype=VALUE_DTYPE)
    header = np.array([(paths.shape[0], paths.shape[1], ensemble.path_dt)], dtype=HEADER_DTYPE)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as stream:
            stream.write(header.tobytes())
            stream.write(paths.tobytes(order="C"))
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise InfraError(f"failed to write paths to {path}: {exc}") from exc


def read_paths_binary(path: Path) -> tuple[np.ndarray, float]:
    """Returns (paths[n_paths, n_steps], dt).

    Raises:
        InfraError: truncated or unreadable file
    """
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise InfraError(f"failed to read {path}: {exc}") from exc
    if len(raw) < HEADER_DTYPE.itemsize:
        raise InfraError(f"{path} is too short for a paths header")
    header = np.frombuffer(raw, dtype=HEADER_DTYPE, count=1)[0]
    n_paths, n_steps = int(header["n_paths"]), int(header["n_steps"])
    expected = HEADER_DTYPE.itemsize + n_paths * n_steps * VALUE_DTYPE.itemsize
    if len(raw) != expected:
        raise InfraError(f"{path} has {len(raw)} bytes, expected {expected}")
    values = np.frombuffer(raw, dtype=VALUE_DTYPE, offset=HEADER_DTYPE.itemsize)
    return values.reshape(n_paths, n_steps).astype(np.float64), float(header["dt"])
