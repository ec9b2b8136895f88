"""Global and local YAML config loaders."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict

import yaml

from fdtlab.app.infra.errors import ConfigError


def _load_yaml(path: Path, label: str) -> Dict[str, Any]:
    if not path.exists():
        return {}
    try:
        with path.open("r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"failed to load {label} config: {path}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{label} config invalid format: {path}")
    return data


def load_global_yaml(root: Path) -> Dict[str, Any]:
    """Load global YAML config (config/fdtlab.yaml)."""
    return _load_yaml(root / "config" / "fdtlab.yaml", "global")


def load_local_yaml(root: Path) -> Dict[str, Any]:
    """Load local YAML config (config/fdtlab.local.yaml, optional)."""
    return _load_yaml(root / "config" / "fdtlab.local.yaml", "local")
