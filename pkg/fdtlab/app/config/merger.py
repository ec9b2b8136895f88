"""Config merger."""

from __future__ import annotations

from typing import Any, Dict

from . import constants
from .tolerances import DEFAULT_TOLERANCES


def defaults() -> Dict[str, Any]:
    """Get default config from constants."""
    return {
        "runtime": {
            "threads": constants.THREADS_DEFAULT,
            "seed": constants.SEED_DEFAULT,
            "reproducible": False,
            "out_dir": "out",
        },
        "tolerances": DEFAULT_TOLERANCES.to_dict(),
        "numerics": {
            "dense_size_cap": constants.DENSE_SIZE_CAP,
            "simpson_panels": constants.SIMPSON_PANELS,
            "green_kubo_horizon": constants.GREEN_KUBO_HORIZON,
            "delta_exponents": [constants.DELTA_MIN_EXPONENT, constants.DELTA_MAX_EXPONENT],
        },
        "mc": {
            "block_paths": constants.MC_BLOCK_PATHS,
            "histogram_bins": constants.HISTOGRAM_BINS,
            "inverse_cdf_grid": constants.INVERSE_CDF_GRID,
        },
    }


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Deep merge two dictionaries."""
    result = base.copy()
    for key, value in override.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = deep_merge(result[key], value)
        else:
            result[key] = value
    return result


def merge_configs(
    global_cfg: Dict[str, Any],
    local_cfg: Dict[str, Any],
    run_cfg: Dict[str, Any],
    env_cfg: Dict[str, Any],
    cli_cfg: Dict[str, Any],
) -> Dict[str, Any]:
    """Merge configs with priority: CLI > env > run config > local yaml > global yaml > constants."""
    merged = defaults()
    for layer in (global_cfg, local_cfg, run_cfg, env_cfg, cli_cfg):
        if layer:
            merged = deep_merge(merged, layer)
    return merged
