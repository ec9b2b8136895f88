"""Time and ID utilities."""

from __future__ import annotations

import datetime as dt
import hashlib
import uuid
from typing import Any

from .jsonio import dumps_compact


def today_str(date: dt.date | None = None) -> str:
    """Return YYYY-MM-DD string."""
    target = date or dt.date.today()
    return target.isoformat()


def timestamp_str(now: dt.datetime | None = None) -> str:
    """Return an ISO-8601 UTC timestamp with second resolution."""
    target = now or dt.datetime.now(dt.timezone.utc)
    return target.replace(microsecond=0).isoformat()


def new_run_id() -> str:
    """Generate run_id."""
    return uuid.uuid4().hex


def reproducible_run_id(config: Any) -> str:
    """Derive a run id from the configuration content."""
    digest = hashlib.sha256(dumps_compact(config).encode("utf-8")).hexdigest()
    return digest[:32]


def run_identity(config: Any, *, reproducible: bool) -> tuple[str, str | None]:
    """Return (run_id, timestamp); the timestamp is suppressed when reproducible."""
    if reproducible:
        return reproducible_run_id(config), None
    return new_run_id(), timestamp_str()
