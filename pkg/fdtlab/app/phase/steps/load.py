"""Phase 1: Load."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict

from fdtlab.app.config.getter import get_runtime_config, get_tolerances
from fdtlab.app.config.loader import load_config
from fdtlab.app.config.merger import deep_merge
from fdtlab.app.infra.time_id import run_identity
from fdtlab.app.models.loader import load_model


def execute(context: Dict[str, Any]) -> None:
    """Merge the config chain, resolve tolerances and load the model (Phase 1)."""
    run = context["run"]
    run_cfg = deep_merge(dict(run.config), {"tolerances": dict(run.tolerances)})
    config = load_config(run_cfg, context.get("cli_args"), root=context.get("root"))
    runtime = get_runtime_config(config)

    run_id, timestamp = run_identity(
        {"run": run.model_dump(mode="json", by_alias=True), "config": config},
        reproducible=runtime["reproducible"],
    )
    context["config"] = config
    context["runtime"] = runtime
    context["tolerances"] = get_tolerances(config)
    context["run_id"] = run_id
    context["timestamp"] = timestamp
    context["out_dir"] = Path(context.get("out_dir") or runtime["out_dir"])
    context["bundle"] = load_model(run.model)
