"""Check records and the FdtReport container."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, TextIO

from fdtlab.app.infra.jsonio import atomic_write_json, dumps_compact

CSV_COLUMNS = ("check", "family", "param_json", "residual", "tolerance", "verdict")
PASS = "pass"
FAIL = "fail"


@dataclass(frozen=True)
class CheckRecord:
    check: str
    family: str
    residual: float
    tolerance: float
    params: Mapping[str, Any] = field(default_factory=dict)
    metadata: Mapping[str, Any] = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        # nan residuals fail
        return PASS if self.residual <= self.tolerance else FAIL

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def param_json(self) -> str:
        return dumps_compact(dict(self.params))

    def sort_key(self) -> tuple:
        residual = self.residual if not math.isnan(self.residual) else math.inf
        return (self.check, self.family, self.param_json, residual, self.tolerance)

    def to_row(self) -> Dict[str, str]:
        return {
            "check": self.check,
            "family": self.family,
            "param_json": self.param_json,
            "residual": f"{self.residual:.17g}",
            "tolerance": f"{self.tolerance:.17g}",
            "verdict": self.verdict,
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "check": self.check,
            "family": self.family,
            "params": dict(self.params),
            "residual": self.residual,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "metadata": dict(self.metadata),
        }


def record(
    check: str,
    family: str,
    residual: float,
    tolerance: float,
    *,
    metadata: Optional[Mapping[str, Any]] = None,
    **params: Any,
) -> CheckRecord:
    return CheckRecord(check, family, float(residual), float(tolerance), params, metadata or {})


@dataclass(frozen=True)
class FdtReport:
    """An order-independent collection of check records."""

    rows: tuple[CheckRecord, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(sorted(self.rows, key=CheckRecord.sort_key)))

    @classmethod
    def of(cls, rows: Iterable[CheckRecord]) -> "FdtReport":
        return cls(tuple(rows))

    @classmethod
    def merge_all(cls, reports: Iterable["FdtReport"]) -> "FdtReport":
        rows: List[CheckRecord] = []
        for report in reports:
            rows.extend(report.rows)
        return cls(tuple(rows))

    def merge(self, other: "FdtReport") -> "FdtReport":
        return FdtReport(self.rows + other.rows)

    def with_params(self, **params: Any) -> "FdtReport":
        """Copy with ``params`` added to every row."""
        return FdtReport(tuple(
            CheckRecord(r.check, r.family, r.residual, r.tolerance, {**r.params, **params},
                        r.metadata)
            for r in self.rows
        ))

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def failures(self) -> list[CheckRecord]:
        return [r for r in self.rows if not r.passed]

    def by_check(self, name: str) -> list[CheckRecord]:
        return [r for r in self.rows if r.check == name]

    def max_residual(self, name: str) -> float:
        values = [r.residual for r in self.by_check(name)]
        return max(values) if values else 0.0

    def summary(self) -> Dict[str, Any]:
        checks: Dict[str, Dict[str, int]] = {}
        for r in self.rows:
            entry = checks.setdefault(r.check, {PASS: 0, FAIL: 0})
            entry[r.verdict] += 1
        return {"rows": len(self.rows), "all_passed": self.all_passed, "checks": checks}

    def write_csv(self, stream: TextIO) -> None:
        writer = csv.DictWriter(stream, fieldnames=list(CSV_COLUMNS), lineterminator="\n")
        writer.writeheader()
        for r in self.rows:
            writer.writerow(r.to_row())

    def to_csv(self, path: Optional[Path] = None) -> str:
        buffer = io.StringIO()
        self.write_csv(buffer)
        text = buffer.getvalue()
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
        return text

    def to_dict(self, **extra: Any) -> Dict[str, Any]:
        return {**extra, "summary": self.summary(), "rows": [r.to_dict() for r in self.rows]}

    def to_json(self, path: Path, **extra: Any) -> None:
        atomic_write_json(path, self.to_dict(**extra))
