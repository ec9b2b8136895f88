"""Errors, JSON IO, run ids, runlogs and log formatting."""

import json
import logging
import math

import numpy as np
import orjson
import pytest

from fdtlab.app.infra.errors import (
    ConfigError,
    DeltaTooLarge,
    EmptyGrid,
    FDTLabError,
    InfraError,
    MarkovError,
    ModelError,
    NegativeRate,
    ParseError,
    PerturbationError,
    ValidationError,
)
from fdtlab.app.infra.jsonio import atomic_write_json, dumps, dumps_compact, read_json
from fdtlab.app.infra.logger import _KVFormatter, get_logger, log_exception, with_fields
from fdtlab.app.infra.runlog import write_runlog
from fdtlab.app.infra.time_id import reproducible_run_id, run_identity, timestamp_str


class TestErrors:
    def test_config_error_defaults(self):
        exc = ConfigError("bad value")
        assert exc.code == "CONFIG_ERROR"
        assert exc.user_message.startswith("設定エラー")
        assert exc.retryable is False

    def test_to_dict_shape(self):
        exc = ConfigError("bad value", details={"key": "threads"})
        data = exc.to_dict()
        assert set(data) == {"error", "code", "details", "retryable"}
        assert data["details"] == {"key": "threads"}

    def test_infra_error_is_retryable(self):
        assert InfraError("disk full").retryable is True

    def test_negative_rate_details(self):
        exc = NegativeRate(0, 1, -2.0)
        assert isinstance(exc, MarkovError)
        assert isinstance(exc, FDTLabError)
        assert exc.code == "NEGATIVE_RATE"
        assert exc.details == {"x": 0, "y": 1, "rate": -2.0}

    def test_delta_too_large_details(self):
        exc = DeltaTooLarge(3.0, 2.0)
        assert isinstance(exc, PerturbationError)
        assert exc.details == {"delta": 3.0, "cap": 2.0}

    def test_validation_error_code_override(self):
        exc = ValidationError("missing", code="FILE_NOT_FOUND")
        assert isinstance(exc, ModelError)
        assert exc.code == "FILE_NOT_FOUND"
        assert ValidationError("x").code == "VALIDATION_ERROR"

    def test_parse_error_location(self):
        exc = ParseError("invalid JSON", line=3, column=5)
        assert "line 3, column 5" in str(exc)
        assert exc.details == {"line": 3, "column": 5}

    def test_empty_grid_names_the_grid(self):
        assert EmptyGrid("delta").details == {"grid": "delta"}


class TestJsonIO:
    def test_dumps_sorted_with_numpy(self):
        text = dumps({"b": 1, "a": np.arange(2)})
        assert orjson.loads(text) == {"a": [0, 1], "b": 1}
        assert text.index(b'"a"') < text.index(b'"b"')

    def test_non_finite_floats_become_strings(self):
        data = orjson.loads(dumps({"x": math.inf, "y": [math.nan]}))
        assert data == {"x": "inf", "y": ["nan"]}

    def test_dumps_compact_single_line(self):
        text = dumps_compact({"s": 0.5, "t": 1.0})
        assert "\n" not in text
        assert text == '{"s":0.5,"t":1.0}'

    def test_atomic_write_roundtrip(self, tmp_path):
        path = tmp_path / "nested" / "out.json"
        atomic_write_json(path, {"run_id": "abc", "values": np.array([1.5, 2.5])})
        assert read_json(path) == {"run_id": "abc", "values": [1.5, 2.5]}
        assert not list(path.parent.glob("*.tmp"))

    def test_read_json_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_json(tmp_path / "absent.json")


class TestRunIdentity:
    def test_reproducible_id_is_content_hash(self):
        config = {"runtime": {"seed": 1}, "tolerances": {"fdt": 1e-9}}
        assert reproducible_run_id(config) == reproducible_run_id(dict(config))
        assert reproducible_run_id(config) != reproducible_run_id({"runtime": {"seed": 2}})
        assert len(reproducible_run_id(config)) == 32

    def test_reproducible_identity_has_no_timestamp(self):
        run_id, timestamp = run_identity({"a": 1}, reproducible=True)
        assert timestamp is None
        assert run_id == reproducible_run_id({"a": 1})

    def test_fresh_identity(self):
        first, timestamp = run_identity({"a": 1}, reproducible=False)
        second, _ = run_identity({"a": 1}, reproducible=False)
        assert first != second
        assert timestamp is not None and "T" in timestamp

    def test_timestamp_has_second_resolution(self):
        assert "." not in timestamp_str()


def test_write_runlog(tmp_path):
    path = write_runlog(tmp_path, "run42", {"summary": {"rows": 3}})
    assert path == tmp_path / "runs" / "run42.json"
    assert read_json(path) == {"run_id": "run42", "summary": {"rows": 3}}


class TestLogger:
    def test_get_logger_is_configured_once(self):
        logger = get_logger("fdtlab.tests.once")
        assert len(logger.handlers) == len(get_logger("fdtlab.tests.once").handlers)
        assert logger.propagate is False

    def test_run_scoped_child(self):
        assert get_logger("fdtlab.tests", run_id="r1").name == "fdtlab.tests.r1"

    def test_with_fields(self):
        assert with_fields(get_logger("fdtlab.tests"), n=3) == {"extra": {"extra_fields": {"n": 3}}}

    def test_json_formatter_flattens_extra_fields(self):
        record = logging.LogRecord("fdtlab.x", logging.INFO, __file__, 1, "done", None, None)
        record.extra_fields = {"residual": np.float64(1e-12), "eta": [math.inf], "n": np.int64(4)}
        payload = json.loads(_KVFormatter(human=False).format(record))
        assert payload["message"] == "done"
        assert payload["residual"] == 1e-12
        assert payload["eta"] == ["inf"]
        assert payload["n"] == 4

    def test_human_formatter(self):
        record = logging.LogRecord("fdtlab.x", logging.WARNING, __file__, 1, "slow", None, None)
        record.extra_fields = {"elapsed_seconds": 1.25}
        line = _KVFormatter(human=True).format(record)
        assert "WARNING: slow" in line
        assert "elapsed_seconds=1.25" in line

    def test_log_exception_adds_error_code(self):
        logger = get_logger("fdtlab.tests.exc")
        seen = []

        class Capture(logging.Handler):
            def emit(self, record):
                seen.append(record)

        handler = Capture()
        logger.addHandler(handler)
        try:
            try:
                raise EmptyGrid("s")
            except EmptyGrid as exc:
                log_exception(logger, "scan failed", exc, check="near_equilibrium")
        finally:
            logger.removeHandler(handler)
        assert seen[0].extra_fields["error_code"] == "EMPTY_GRID"
        assert seen[0].extra_fields["exception_type"] == "EmptyGrid"
        assert seen[0].extra_fields["check"] == "near_equilibrium"
