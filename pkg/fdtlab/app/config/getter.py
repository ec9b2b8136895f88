"""Config getter utilities."""

from __future__ import annotations

from typing import Any, Dict, Optional

from . import constants
from .tolerances import DEFAULT_TOLERANCES, Tolerances

_config_cache: Optional[Dict[str, Any]] = None


def set_config(config: Optional[Dict[str, Any]]) -> None:
    """Set global config cache."""
    global _config_cache
    _config_cache = config


def get_config() -> Optional[Dict[str, Any]]:
    """Get global config cache."""
    return _config_cache


def get_tolerances(config: Optional[Dict[str, Any]] = None) -> Tolerances:
    """Tolerances from the given config, the cache, or the defaults."""
    cfg = config or _config_cache
    if not cfg:
        return DEFAULT_TOLERANCES
    return Tolerances.from_config(cfg)


def get_runtime_config(config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Get runtime configuration (threads, seed, reproducible, out_dir)."""
    cfg = config or _config_cache or {}
    runtime = cfg.get("runtime", {})
    return {
        "threads": int(runtime.get("threads") or constants.THREADS_DEFAULT),
        "seed": int(runtime.get("seed", constants.SEED_DEFAULT)),
        "reproducible": bool(runtime.get("reproducible", False)),
        "out_dir": runtime.get("out_dir") or "out",
    }


def get_numerics_config(config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    cfg = config or _config_cache or {}
    numerics = cfg.get("numerics", {})
    exponents = numerics.get("delta_exponents") or [
        constants.DELTA_MIN_EXPONENT,
        constants.DELTA_MAX_EXPONENT,
    ]
    return {
        "dense_size_cap": int(numerics.get("dense_size_cap") or constants.DENSE_SIZE_CAP),
        "simpson_panels": int(numerics.get("simpson_panels") or constants.SIMPSON_PANELS),
        "green_kubo_horizon": float(
            numerics.get("green_kubo_horizon") or constants.GREEN_KUBO_HORIZON
        ),
        "delta_exponents": (int(exponents[0]), int(exponents[1])),
    }


def get_mc_config(config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    cfg = config or _config_cache or {}
    mc = cfg.get("mc", {})
    return {
        "block_paths": int(mc.get("block_paths") or constants.MC_BLOCK_PATHS),
        "histogram_bins": int(mc.get("histogram_bins") or constants.HISTOGRAM_BINS),
        "inverse_cdf_grid": int(mc.get("inverse_cdf_grid") or constants.INVERSE_CDF_GRID),
    }
