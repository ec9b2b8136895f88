"""Runlog writer."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict

from .jsonio import atomic_write_json


def write_runlog(out_dir: Path, run_id: str, payload: Dict[str, Any]) -> Path:
    """Write ``runs/<run_id>.json`` under the output directory."""
    run_dir = out_dir / "runs"
    run_dir.mkdir(parents=True, exist_ok=True)
    path = run_dir / f"{run_id}.json"
    atomic_write_json(path, {"run_id": run_id, **payload})
    return path
