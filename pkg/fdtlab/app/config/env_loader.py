"""Environment variable loader."""

from __future__ import annotations

import os
from typing import Any, Dict

from fdtlab.app.infra.errors import ConfigError

ENV_PREFIX = "FDT_LAB_"
TOL_PREFIX = "FDT_LAB_TOL_"


def load_env_overrides(environ: Dict[str, str] | None = None) -> Dict[str, Any]:
    """Load environment variable overrides into the nested config layout."""
    env = os.environ if environ is None else environ
    result: Dict[str, Any] = {}
    runtime: Dict[str, Any] = {}

    threads = env.get("FDT_LAB_THREADS")
    if threads:
        runtime["threads"] = _parse_int("FDT_LAB_THREADS", threads, minimum=1)
    seed = env.get("FDT_LAB_SEED")
    if seed:
        runtime["seed"] = _parse_int("FDT_LAB_SEED", seed, minimum=0)
    out_dir = env.get("FDT_LAB_OUT_DIR")
    if out_dir:
        runtime["out_dir"] = out_dir
    if runtime:
        result["runtime"] = runtime

    tolerances: Dict[str, Any] = {}
    for key, value in env.items():
        if key.startswith(TOL_PREFIX) and value:
            tolerances[key[len(TOL_PREFIX):].lower()] = value
    if tolerances:
        result["tolerances"] = tolerances
    return result


def _parse_int(name: str, value: str, *, minimum: int) -> int:
    try:
        number = int(value.strip())
    except ValueError as exc:
        raise ConfigError(f"{name} must be an integer, got {value!r}") from exc
    if number < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {number}")
    return number
