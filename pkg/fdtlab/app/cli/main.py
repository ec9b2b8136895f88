"""CLI entrypoint."""

from __future__ import annotations

from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Optional

import orjson
import typer

from fdtlab.app.infra.errors import ConfigError, FDTLabError, ValidationError
from fdtlab.app.infra.jsonio import dumps, dumps_compact
from fdtlab.app.models.loader import load_model, load_run_config, run_config_from_dict
from fdtlab.app.models.schema import RunConfig
from fdtlab.app.phase.runner import (
    EXIT_ERROR,
    EXIT_FAIL,
    EXIT_PASS,
    SuiteOutcome,
    prepare_run,
    run_suite,
)
from .sweep import SweepTable, refinement_sweep, relax_scan, response_sweep

app = typer.Typer(help="fdtlab: fluctuation-dissipation verification for Markov models")

MC_CHECKS = ["mc_stationary", "mc_fdt", "mc_response", "weak_order"]

MODEL_OPTION = typer.Option(None, "--model", help="Model file (JSON or YAML)")
CONFIG_OPTION = typer.Option(None, "--config", help="Run config file (JSON or YAML)")
OUT_DIR_OPTION = typer.Option(None, "--out-dir", help="Directory for report files")
SEED_OPTION = typer.Option(None, "--seed", help="Root seed for random batteries and Monte Carlo")
REPRODUCIBLE_OPTION = typer.Option(
    False, "--reproducible", help="Run id from the config hash, no timestamp"
)
TOL_OPTION = typer.Option(
    None, "--tol-overrides", help='Tolerance overrides: "fdt=1e-8,static=1e-9" or a JSON object'
)
CHECKS_OPTION = typer.Option(None, "--checks", help="Comma-separated check names")


@contextmanager
def _guarded() -> Iterator[None]:
    """Render FDTLabError as JSON on stderr and exit 2."""
    try:
        yield
    except FDTLabError as exc:
        typer.echo(dumps_compact(exc.to_dict()), err=True)
        raise typer.Exit(EXIT_ERROR) from exc


def parse_tol_overrides(text: Optional[str]) -> Dict[str, float]:
    """Parse ``name=value`` pairs or a JSON object into tolerance overrides.

    Raises:
        ConfigError: malformed pair or non-numeric value
    """
    if not text or not text.strip():
        return {}
    text = text.strip()
    if text.startswith("{"):
        try:
            data = orjson.loads(text)
        except orjson.JSONDecodeError as exc:
            raise ConfigError(f"--tol-overrides is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("--tol-overrides JSON must be an object")
        items = list(data.items())
    else:
        items = []
        for part in text.split(","):
            name, sep, value = part.partition("=")
            if not sep or not name.strip():
                raise ConfigError(f"--tol-overrides entry {part!r} is not name=value")
            items.append((name.strip(), value.strip()))
    overrides: Dict[str, float] = {}
    for name, value in items:
        try:
            overrides[str(name)] = float(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"tolerance {name} must be a number, got {value!r}") from exc
    return overrides


def _split(text: Optional[str]) -> Optional[List[str]]:
    if not text:
        return None
    names = [name.strip() for name in text.split(",") if name.strip()]
    return names or None


def _run_config(model: Optional[str], config: Optional[str]) -> RunConfig:
    if config:
        run = load_run_config(config)
        if model:
            run = run.model_copy(update={"model": str(Path(model).resolve())})
        return run
    if model:
        return run_config_from_dict({"model": str(Path(model).resolve())})
    raise typer.BadParameter("--model or --config is required")


def _cli_args(
    seed: Optional[int], reproducible: bool, out_dir: Optional[str], tol_overrides: Optional[str]
) -> Dict[str, Any]:
    runtime: Dict[str, Any] = {}
    if seed is not None:
        runtime["seed"] = seed
    if reproducible:
        runtime["reproducible"] = True
    if out_dir:
        runtime["out_dir"] = out_dir
    args: Dict[str, Any] = {}
    if runtime:
        args["runtime"] = runtime
    tolerances = parse_tol_overrides(tol_overrides)
    if tolerances:
        args["tolerances"] = tolerances
    return args


def _emit_outcome(outcome: SuiteOutcome) -> None:
    typer.echo(dumps({
        "run_id": outcome.run_id,
        "summary": outcome.report.summary(),
        "outputs": {k: str(v) for k, v in outcome.outputs.items()},
    }).decode("utf-8"))
    raise typer.Exit(outcome.exit_code)


def _suite(
    model: Optional[str],
    config: Optional[str],
    out_dir: Optional[str],
    seed: Optional[int],
    reproducible: bool,
    tol_overrides: Optional[str],
    checks: Optional[List[str]],
) -> None:
    with _guarded():
        run = _run_config(model, config)
        outcome = run_suite(
            run,
            cli_args=_cli_args(seed, reproducible, out_dir, tol_overrides),
            checks_override=checks,
        )
    _emit_outcome(outcome)


def _sweep(
    builder: Callable[[Dict[str, Any]], SweepTable],
    needs: str,
    model: Optional[str],
    config: Optional[str],
    out_dir: Optional[str],
    seed: Optional[int],
    reproducible: bool,
    tol_overrides: Optional[str],
) -> None:
    with _guarded():
        run = _run_config(model, config)
        context = prepare_run(run, cli_args=_cli_args(seed, reproducible, out_dir, tol_overrides))
        if needs not in context:
            kind = "finite" if needs == "family" else "torus"
            raise ValidationError(f"this subcommand needs a {kind} model",
                                  details={"model": run.model})
        table = builder(context)
        text = table.to_csv(context["out_dir"] / f"{table.name}.csv")
    typer.echo(text, nl=False)
    raise typer.Exit(EXIT_PASS if table.report.all_passed else EXIT_FAIL)


@app.command()
def validate(
    model: Optional[str] = MODEL_OPTION,
    config: Optional[str] = CONFIG_OPTION,
    out_dir: Optional[str] = OUT_DIR_OPTION,
    seed: Optional[int] = SEED_OPTION,
    tol_overrides: Optional[str] = TOL_OPTION,
) -> None:
    """Load and validate a model, or a full run config up to the δ checks."""
    with _guarded():
        if config:
            run = _run_config(model, config)
            context = prepare_run(run, cli_args=_cli_args(seed, False, out_dir, tol_overrides))
            payload = {
                "run_id": context["run_id"],
                "model": context["bundle"].describe(),
                "observables": sorted(context["observables"]),
                "deltas": context["deltas"],
            }
        elif model:
            payload = {"model": load_model(model).describe()}
        else:
            raise typer.BadParameter("--model or --config is required")
    typer.echo(dumps(payload).decode("utf-8"))


@app.command()
def fdt(
    model: Optional[str] = MODEL_OPTION,
    config: Optional[str] = CONFIG_OPTION,
    out_dir: Optional[str] = OUT_DIR_OPTION,
    seed: Optional[int] = SEED_OPTION,
    reproducible: bool = REPRODUCIBLE_OPTION,
    tol_overrides: Optional[str] = TOL_OPTION,
    checks: Optional[str] = CHECKS_OPTION,
) -> None:
    """Run the FDT suite and write report.csv / report.json."""
    _suite(model, config, out_dir, seed, reproducible, tol_overrides, _split(checks))


@app.command(name="green-kubo")
def green_kubo_cmd(
    model: Optional[str] = MODEL_OPTION,
    config: Optional[str] = CONFIG_OPTION,
    out_dir: Optional[str] = OUT_DIR_OPTION,
    seed: Optional[int] = SEED_OPTION,
    reproducible: bool = REPRODUCIBLE_OPTION,
    tol_overrides: Optional[str] = TOL_OPTION,
) -> None:
    """Green–Kubo identity and dissipation checks (reversible models)."""
    _suite(model, config, out_dir, seed, reproducible, tol_overrides, ["green_kubo"])


@app.command()
def mc(
    model: Optional[str] = MODEL_OPTION,
    config: Optional[str] = CONFIG_OPTION,
    out_dir: Optional[str] = OUT_DIR_OPTION,
    seed: Optional[int] = SEED_OPTION,
    reproducible: bool = REPRODUCIBLE_OPTION,
    tol_overrides: Optional[str] = TOL_OPTION,
    checks: Optional[str] = CHECKS_OPTION,
) -> None:
    """Monte Carlo checks on a torus model."""
    _suite(model, config, out_dir, seed, reproducible, tol_overrides,
           _split(checks) or MC_CHECKS)


@app.command(name="response-sweep")
def response_sweep_cmd(
    model: Optional[str] = MODEL_OPTION,
    config: Optional[str] = CONFIG_OPTION,
    out_dir: Optional[str] = OUT_DIR_OPTION,
    seed: Optional[int] = SEED_OPTION,
    reproducible: bool = REPRODUCIBLE_OPTION,
    tol_overrides: Optional[str] = TOL_OPTION,
) -> None:
    """CSV of (δ, η_δ) with a fitted-slope footer."""
    _sweep(response_sweep, "family", model, config, out_dir, seed, reproducible, tol_overrides)


@app.command(name="relax-scan")
def relax_scan_cmd(
    model: Optional[str] = MODEL_OPTION,
    config: Optional[str] = CONFIG_OPTION,
    out_dir: Optional[str] = OUT_DIR_OPTION,
    seed: Optional[int] = SEED_OPTION,
    reproducible: bool = REPRODUCIBLE_OPTION,
    tol_overrides: Optional[str] = TOL_OPTION,
) -> None:
    """CSV of (s, d(s), TV) with fitted-rate and gap footers."""
    _sweep(relax_scan, "family", model, config, out_dir, seed, reproducible, tol_overrides)


@app.command()
def discretize(
    model: Optional[str] = MODEL_OPTION,
    config: Optional[str] = CONFIG_OPTION,
    out_dir: Optional[str] = OUT_DIR_OPTION,
    seed: Optional[int] = SEED_OPTION,
    reproducible: bool = REPRODUCIBLE_OPTION,
    tol_overrides: Optional[str] = TOL_OPTION,
) -> None:
    """Grid refinement table of a torus model with fitted orders."""
    _sweep(refinement_sweep, "torus", model, config, out_dir, seed, reproducible, tol_overrides)


if __name__ == "__main__":
    app()
