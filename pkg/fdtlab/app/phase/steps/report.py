"""Phase 5: Report."""

from __future__ import annotations

from typing import Any, Dict

from fdtlab.app.infra.runlog import write_runlog
from fdtlab.app.suite.report import FdtReport

REPORT_CSV = "report.csv"
REPORT_JSON = "report.json"


def execute(context: Dict[str, Any]) -> None:
    """Write report.csv, report.json and the runlog (Phase 5)."""
    out_dir = context["out_dir"]
    report: FdtReport = context["report"]
    run = context["run"]
    header = {
        "run_id": context["run_id"],
        "model": context["bundle"].describe(),
        "family": run.family if context["bundle"].is_finite else "Diffusion",
        "checks": context.get("checks_run", []),
    }
    if context.get("timestamp"):
        header["timestamp"] = context["timestamp"]

    csv_path = out_dir / REPORT_CSV
    json_path = out_dir / REPORT_JSON
    report.to_csv(csv_path)
    report.to_json(json_path, **header)
    context["outputs"] = {"csv": csv_path, "json": json_path}
    context["runlog"] = write_runlog(out_dir, context["run_id"], {
        **header,
        "summary": report.summary(),
        "tolerances": context["tolerances"].to_dict(),
        "outputs": {k: str(v) for k, v in context["outputs"].items()},
    })
