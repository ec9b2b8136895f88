"""Model and run-config files: parse, validate, bundle."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, Mapping, Sequence, Type, TypeVar

import orjson
import yaml
from pydantic import BaseModel
from pydantic import ValidationError as PydanticValidationError

from fdtlab.app.infra.errors import FDTLabError, ParseError, ValidationError
from fdtlab.app.infra.jsonio import read_json
from fdtlab.app.infra.logger import get_logger
from .bundle import ModelBundle, bundle_from_document
from .schema import MODEL_KINDS, RunConfig

logger = get_logger(__name__)

T = TypeVar("T", bound=BaseModel)

_BOUNDS = {
    "greater_than_equal": ("<", "ge"),
    "greater_than": ("<=", "gt"),
    "less_than_equal": (">", "le"),
    "less_than": (">=", "lt"),
}


def field_path(loc: Sequence[Any]) -> str:
    """('rates', 3, 'rate') -> 'rates[3].rate'."""
    out = ""
    for part in loc:
        if isinstance(part, int):
            out += f"[{part}]"
        else:
            out += f".{part}" if out else str(part)
    return out


def describe_error(error: Mapping[str, Any]) -> str:
    """One pydantic error as '<path> <violated invariant>'."""
    path = field_path(error.get("loc", ()))
    kind = error.get("type", "")
    ctx = error.get("ctx") or {}
    if kind in _BOUNDS:
        op, key = _BOUNDS[kind]
        bound = ctx.get(key)
        if isinstance(bound, (int, float)) and not isinstance(bound, bool):
            bound = f"{bound:g}"
        return f"{path} {op} {bound}"
    if kind == "value_error":
        message = str(ctx.get("error", error.get("msg", "")))
        return f"{path}: {message}" if path else message
    if kind == "missing":
        return f"{path} is required"
    if kind == "extra_forbidden":
        return f"{path} is not a known field"
    return f"{path}: {error.get('msg', kind)}" if path else str(error.get("msg", kind))


def validate_document(model: Type[T], data: Any, *, source: str = "<document>") -> T:
    """Validate a parsed document.

    Raises:
        ValidationError: the first violated invariant, all of them in ``details``
    """
    try:
        return model.model_validate(data)
    except PydanticValidationError as exc:
        messages = [describe_error(e) for e in exc.errors()]
        raise ValidationError(
            messages[0],
            details={"source": source, "errors": messages},
        ) from exc


def _parse_json(path: Path) -> Any:
    try:
        return read_json(path)
    except FileNotFoundError as exc:
        raise ValidationError(f"file not found: {path}", code="FILE_NOT_FOUND") from exc
    except orjson.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc.msg}",
                         line=exc.lineno, column=exc.colno) from exc


def _parse_yaml(path: Path) -> Any:
    try:
        with path.open("r", encoding="utf-8") as f:
            return yaml.safe_load(f)
    except FileNotFoundError as exc:
        raise ValidationError(f"file not found: {path}", code="FILE_NOT_FOUND") from exc
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ParseError(
            f"invalid YAML in {path}",
            line=mark.line + 1 if mark is not None else None,
            column=mark.column + 1 if mark is not None else None,
        ) from exc


def parse_file(path: Path) -> Any:
    """JSON, or YAML for .yaml/.yml files.

    Raises:
        ParseError: syntax error, with line and column
        ValidationError: missing file
    """
    if path.suffix.lower() in (".yaml", ".yml"):
        return _parse_yaml(path)
    return _parse_json(path)


def load_model_data(data: Any, *, source: str = "<document>", path: Path | None = None) -> ModelBundle:
    if not isinstance(data, dict):
        raise ValidationError("model document must be a JSON object", details={"source": source})
    kind = data.get("kind")
    schema = MODEL_KINDS.get(kind) if isinstance(kind, str) else None
    if schema is None:
        raise ValidationError(
            f"kind must be one of {sorted(MODEL_KINDS)}, got {kind!r}",
            details={"source": source},
        )
    document = validate_document(schema, data, source=source)
    try:
        return bundle_from_document(document, path)  # type: ignore[arg-type]
    except ValidationError:
        raise
    except FDTLabError as exc:
        # construction errors (negative rate, malformed cycle, ...) are model errors here
        raise ValidationError(str(exc), details={"source": source, "cause": exc.to_dict()}) from exc


def load_model(path: "Path | str") -> ModelBundle:
    """Parse, validate and bundle a model file.

    Raises:
        ParseError: syntax error, with line/column
        ValidationError: schema or model invariant violated (e.g. "rates[3].rate < 0")
    """
    path = Path(path)
    bundle = load_model_data(parse_file(path), source=str(path), path=path)
    logger.info("model loaded", extra={"extra_fields": {"path": str(path), **bundle.describe()}})
    return bundle


def load_run_config(path: "Path | str") -> RunConfig:
    """Parse and validate a run config; ``model`` is resolved against the config's directory.

    Raises:
        ParseError, ValidationError
    """
    path = Path(path)
    data = parse_file(path)
    if not isinstance(data, dict):
        raise ValidationError("run config must be a mapping", details={"source": str(path)})
    config = validate_document(RunConfig, data, source=str(path))
    model_path = Path(config.model)
    if not model_path.is_absolute():
        model_path = (path.parent / model_path).resolve()
    return config.model_copy(update={"model": str(model_path)})


def run_config_from_dict(data: Dict[str, Any], *, base: Path | None = None) -> RunConfig:
    config = validate_document(RunConfig, data, source="<run config>")
    if base is not None and not Path(config.model).is_absolute():
        return config.model_copy(update={"model": str((base / config.model).resolve())})
    return config
