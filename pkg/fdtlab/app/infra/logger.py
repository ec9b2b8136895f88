"""Structured logger setup with file output and CLI detection."""

from __future__ import annotations

import logging
import math
import os
import sys
from logging.handlers import TimedRotatingFileHandler
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import orjson


def _is_cli_execution() -> bool:
    """Check if running as CLI (via __main__ or the console script)."""
    if len(sys.argv) == 0:
        return False
    if Path(sys.argv[0]).name == "fdtlab":
        return True
    main_module = sys.modules.get("__main__")
    if main_module is None:
        return False
    main_file = getattr(main_module, "__file__", None)
    if main_file is None:
        return False
    main_file_str = str(main_file)
    return "cli" in main_file_str or "fdtlab" in main_file_str


def _plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and non-finite floats into log-safe values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        if value.size > 16:
            return f"<array shape={value.shape} dtype={value.dtype}>"
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


class _KVFormatter(logging.Formatter):
    def __init__(self, *, human: bool = False) -> None:
        super().__init__()
        self.human = human

    def format(self, record: logging.LogRecord) -> str:  # pragma: no cover
        """Format log record as JSON or human-readable."""
        payload: Dict[str, Any] = {
            "timestamp": self.formatTime(record, self.datefmt),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }

        if hasattr(record, "extra_fields") and isinstance(record.extra_fields, dict):
            payload.update(_plain(record.extra_fields))

        if record.exc_info:
            payload["traceback"] = self.formatException(record.exc_info)

        if self.human:
            parts = [f"[{payload['timestamp']}] {payload['level']}: {payload['message']}"]
            for key, value in payload.items():
                if key in {"timestamp", "level", "message", "logger"}:
                    continue
                if key == "traceback":
                    parts.append(f"\n{value}")
                elif isinstance(value, float):
                    parts.append(f"{key}={value:.6g}")
                else:
                    parts.append(f"{key}={value}")
            return " ".join(parts)

        return orjson.dumps(payload, default=str).decode("utf-8")


def _get_log_file_path() -> Optional[Path]:
    log_file = os.getenv("FDT_LAB_LOG_FILE")
    if not log_file:
        return None
    path = Path(log_file)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def get_logger(name: str = "fdtlab", run_id: Optional[str] = None) -> logging.Logger:
    """Return configured logger.

    Console output is human-readable when invoked from the CLI and JSON lines
    otherwise (``FDT_LAB_LOG_FORMAT`` forces either). A rotating JSON file
    sink is attached when ``FDT_LAB_LOG_FILE`` is set.

    Args:
        name: Logger name, usually the module's dotted path.
        run_id: Optional run id; a run-scoped child logger is returned.
    """
    logger_name = f"{name}.{run_id}" if run_id else name
    logger = logging.getLogger(logger_name)

    if logger.handlers:
        return logger

    log_format_env = os.getenv("FDT_LAB_LOG_FORMAT", "").lower()
    human_readable = log_format_env == "human" or (
        _is_cli_execution() and log_format_env != "json"
    )

    log_level_str = os.getenv("FDT_LAB_LOG_LEVEL", "WARNING").upper()
    log_level = getattr(logging, log_level_str, logging.WARNING)

    # stderr keeps stdout free for CSV emitted by the sweep commands
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(_KVFormatter(human=human_readable))
    console_handler.setLevel(log_level)
    logger.addHandler(console_handler)

    log_file = _get_log_file_path()
    if log_file:
        file_handler = TimedRotatingFileHandler(
            str(log_file),
            when="midnight",
            interval=1,
            backupCount=int(os.getenv("FDT_LAB_LOG_ROTATION", "14")),
            encoding="utf-8",
        )
        file_handler.setFormatter(_KVFormatter(human=False))
        file_handler.setLevel(logging.DEBUG)
        logger.addHandler(file_handler)
        logger.setLevel(logging.DEBUG)
    else:
        logger.setLevel(log_level)

    logger.propagate = False
    return logger


def with_fields(logger: logging.Logger, **fields: Any) -> Dict[str, Any]:
    """Helper to attach extra fields when logging."""
    return {"extra": {"extra_fields": fields}}


def log_exception(logger: logging.Logger, message: str, exc: Exception, **extra: Any) -> None:
    """Log exception with traceback and extra fields."""
    fields = {**extra, "exception_type": type(exc).__name__}
    code = getattr(exc, "code", None)
    if code:
        fields["error_code"] = code
    logger.error(message, exc_info=True, extra={"extra_fields": fields})
