"""JSON IO helpers with atomic write."""

from __future__ import annotations

import math
import tempfile
from pathlib import Path
from typing import Any

import orjson

from .errors import InfraError

_DUMP_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY


def _default(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if hasattr(value, "item"):
        return value.item()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def _finite(data: Any) -> Any:
    """Replace inf/nan floats with strings; orjson would emit null."""
    if isinstance(data, float) and not math.isfinite(data):
        return repr(data)
    if isinstance(data, dict):
        return {k: _finite(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [_finite(v) for v in data]
    return data


def dumps(data: Any) -> bytes:
    """Serialize deterministically (sorted keys, numpy arrays as lists)."""
    return orjson.dumps(_finite(data), default=_default, option=_DUMP_OPTIONS)


def dumps_compact(data: Any) -> str:
    """Single-line sorted JSON, used for CSV parameter cells."""
    return orjson.dumps(
        _finite(data), default=_default, option=orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY
    ).decode("utf-8")


def read_json(path: Path) -> Any:
    """Read JSON file."""
    try:
        with path.open("rb") as f:
            return orjson.loads(f.read())
    except FileNotFoundError:
        raise
    except orjson.JSONDecodeError:
        raise
    except Exception as exc:  # pragma: no cover - safety net
        raise InfraError(f"failed to read json: {path}") from exc


def atomic_write_json(path: Path, data: Any) -> None:
    """Write JSON file atomically."""
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_fd, tmp_path = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with open(tmp_fd, "wb") as f:
            f.write(dumps(data))
            f.write(b"\n")
        Path(tmp_path).replace(path)
    except Exception as exc:  # pragma: no cover - safety net
        raise InfraError(f"failed to write json atomically: {path}") from exc
    finally:
        try:
            if Path(tmp_path).exists():
                Path(tmp_path).unlink(missing_ok=True)
        except OSError:
            pass
