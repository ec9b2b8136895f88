"""Config loader with priority: CLI > env > run config > local yaml > global yaml > constants."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict

from dotenv import load_dotenv

from .env_loader import load_env_overrides
from .getter import set_config
from .global_loader import load_global_yaml, load_local_yaml
from .merger import merge_configs
from .tolerances import Tolerances


def load_config(
    run_cfg: Dict[str, Any] | None = None,
    cli_args: Dict[str, Any] | None = None,
    *,
    root: Path | None = None,
    use_dotenv: bool = True,
) -> Dict[str, Any]:
    """Load merged config and cache it for the getter utilities.

    ``run_cfg`` is the ``config`` block of a run file; ``cli_args`` holds
    flags already shaped like the config tree (``{"runtime": {...}}``).
    """
    base = Path(root or Path.cwd())
    if use_dotenv:
        load_dotenv(base / ".env", override=False)

    merged = merge_configs(
        load_global_yaml(base),
        load_local_yaml(base),
        run_cfg or {},
        load_env_overrides(),
        cli_args or {},
    )
    # validates names and values early
    merged["tolerances"] = Tolerances.from_config(merged).to_dict()
    set_config(merged)
    return merged
