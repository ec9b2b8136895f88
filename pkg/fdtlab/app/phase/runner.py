"""Phase runner for verification runs."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from fdtlab.app.infra.errors import FDTLabError
from fdtlab.app.infra.logger import get_logger, log_exception
from fdtlab.app.models.schema import RunConfig
from fdtlab.app.suite.report import FdtReport
from .steps.build import execute as build
from .steps.checks import execute as checks
from .steps.load import execute as load
from .steps.report import execute as write_report
from .steps.validate_deltas import execute as validate_deltas

PHASE_NAMES = {
    1: "load",
    2: "build",
    3: "validate_deltas",
    4: "checks",
    5: "report",
}

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_ERROR = 2


@dataclass(frozen=True)
class SuiteOutcome:
    run_id: str
    report: FdtReport
    outputs: Dict[str, Path] = field(default_factory=dict)
    runlog: Optional[Path] = None

    @property
    def exit_code(self) -> int:
        return EXIT_PASS if self.report.all_passed else EXIT_FAIL


def run_suite(
    run: RunConfig,
    *,
    cli_args: Optional[Dict[str, Any]] = None,
    checks_override: Optional[Sequence[str]] = None,
    out_dir: Optional[Path] = None,
    root: Optional[Path] = None,
    write: bool = True,
) -> SuiteOutcome:
    """Execute phases 1-5 for one run config.

    Raises:
        FDTLabError: any phase failure, with the failing check in ``details``
    """
    logger = get_logger(__name__)
    started = time.time()
    context = prepare_run(run, cli_args=cli_args, out_dir=out_dir, root=root)
    context["checks"] = list(checks_override) if checks_override else None

    try:
        _execute_phase(logger, 4, PHASE_NAMES[4], checks, context)
        if write:
            _execute_phase(logger, 5, PHASE_NAMES[5], write_report, context)
    except FDTLabError as exc:
        log_exception(logger, "fdtlab run aborted", exc, run_id=context.get("run_id"),
                      check=exc.details.get("check"))
        raise

    report: FdtReport = context["report"]
    logger.info("fdtlab run completed", extra={"extra_fields": {
        "run_id": context["run_id"],
        "rows": len(report),
        "failures": len(report.failures),
        "all_passed": report.all_passed,
        "elapsed_seconds": round(time.time() - started, 3),
    }})
    return SuiteOutcome(
        run_id=context["run_id"],
        report=report,
        outputs=context.get("outputs", {}),
        runlog=context.get("runlog"),
    )


def _execute_phase(
    logger: Any,
    phase_num: int,
    phase_name: str,
    phase_func: Any,
    context: Dict[str, Any],
) -> None:
    """Execute a phase with logging."""
    logger.debug(f"Phase {phase_num} ({phase_name}) started", extra={"extra_fields": {
        "phase": phase_num,
        "phase_name": phase_name,
    }})

    start_time = time.time()
    try:
        phase_func(context)
        elapsed = time.time() - start_time

        logger.info(f"Phase {phase_num} ({phase_name}) completed", extra={"extra_fields": {
            "phase": phase_num,
            "phase_name": phase_name,
            "elapsed_seconds": round(elapsed, 3),
        }})
    except Exception as exc:
        elapsed = time.time() - start_time
        log_exception(
            logger,
            f"Phase {phase_num} ({phase_name}) failed",
            exc,
            phase=phase_num,
            phase_name=phase_name,
            elapsed_seconds=round(elapsed, 3),
        )
        raise


def prepare_run(
    run: RunConfig,
    *,
    cli_args: Optional[Dict[str, Any]] = None,
    out_dir: Optional[Path] = None,
    root: Optional[Path] = None,
) -> Dict[str, Any]:
    """Phases 1-3 only: the context a sweep or a check run starts from.

    Raises:
        FDTLabError: load, build or δ validation failed
    """
    context: Dict[str, Any] = {
        "run": run,
        "cli_args": cli_args or {},
        "out_dir": out_dir,
        "root": root,
    }
    logger = get_logger(__name__)
    try:
        _execute_phase(logger, 1, PHASE_NAMES[1], load, context)
        logger.info("Starting fdtlab run", extra={"extra_fields": {
            "run_id": context["run_id"],
            "model": run.model,
            "family": run.family,
        }})
        _execute_phase(logger, 2, PHASE_NAMES[2], build, context)
        _execute_phase(logger, 3, PHASE_NAMES[3], validate_deltas, context)
    except FDTLabError as exc:
        log_exception(logger, "fdtlab run aborted", exc, run_id=context.get("run_id"))
        raise
    return context
