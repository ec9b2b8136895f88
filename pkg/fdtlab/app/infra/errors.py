"""Domain-specific exception categories with structured error support."""

from __future__ import annotations

from typing import Any, Dict


class FDTLabError(Exception):
    """Base exception with structured error information."""

    def __init__(
        self,
        message: str,
        *,
        code: str | None = None,
        user_message: str | None = None,
        details: Dict[str, Any] | None = None,
        retryable: bool = False,
    ):
        super().__init__(message)
        self.code = code or self.__class__.__name__.upper()
        self.user_message = user_message or message
        self.details = details or {}
        self.retryable = retryable

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for report and CLI output."""
        return {
            "error": self.user_message,
            "code": self.code,
            "details": self.details,
            "retryable": self.retryable,
        }


class ConfigError(FDTLabError):
    """Configuration related failure."""

    def __init__(self, message: str, **kwargs):
        super().__init__(
            message,
            code=kwargs.pop("code", "CONFIG_ERROR"),
            user_message=kwargs.pop("user_message", f"設定エラー: {message}"),
            **kwargs
        )


class InfraError(FDTLabError):
    """Infrastructure (I/O, OS) failure."""

    def __init__(self, message: str, **kwargs):
        super().__init__(
            message,
            code=kwargs.pop("code", "INFRA_ERROR"),
            user_message=kwargs.pop("user_message", f"インフラエラー: {message}"),
            retryable=kwargs.pop("retryable", True),
            **kwargs
        )


class ModelError(FDTLabError):
    """Model file could not be parsed or violates a model invariant."""

    def __init__(self, message: str, **kwargs):
        super().__init__(
            message,
            code=kwargs.pop("code", "MODEL_ERROR"),
            user_message=kwargs.pop("user_message", f"モデルエラー: {message}"),
            retryable=kwargs.pop("retryable", False),
            **kwargs
        )


class MarkovError(FDTLabError):
    """Generator, semigroup or invariant-measure failure."""

    def __init__(self, message: str, **kwargs):
        super().__init__(
            message,
            code=kwargs.pop("code", "MARKOV_ERROR"),
            user_message=kwargs.pop("user_message", f"マルコフ連鎖エラー: {message}"),
            retryable=kwargs.pop("retryable", False),
            **kwargs
        )


class PerturbationError(FDTLabError):
    """Perturbation family could not be constructed or evaluated."""

    def __init__(self, message: str, **kwargs):
        super().__init__(
            message,
            code=kwargs.pop("code", "PERTURBATION_ERROR"),
            user_message=kwargs.pop("user_message", f"摂動エラー: {message}"),
            retryable=kwargs.pop("retryable", False),
            **kwargs
        )


class ResponseError(FDTLabError):
    """Response function evaluation failure."""

    def __init__(self, message: str, **kwargs):
        super().__init__(
            message,
            code=kwargs.pop("code", "RESPONSE_ERROR"),
            user_message=kwargs.pop("user_message", f"応答関数エラー: {message}"),
            retryable=kwargs.pop("retryable", False),
            **kwargs
        )


class SuiteError(FDTLabError):
    """Verification check precondition failure."""

    def __init__(self, message: str, **kwargs):
        super().__init__(
            message,
            code=kwargs.pop("code", "SUITE_ERROR"),
            user_message=kwargs.pop("user_message", f"検証エラー: {message}"),
            retryable=kwargs.pop("retryable", False),
            **kwargs
        )


class SimulationError(FDTLabError):
    """Diffusion simulation or discretization failure."""

    def __init__(self, message: str, **kwargs):
        super().__init__(
            message,
            code=kwargs.pop("code", "SIMULATION_ERROR"),
            user_message=kwargs.pop("user_message", f"シミュレーションエラー: {message}"),
            retryable=kwargs.pop("retryable", False),
            **kwargs
        )


# markov-core

class NegativeRate(MarkovError):
    def __init__(self, x: int, y: int, rate: float, **kwargs):
        super().__init__(
            f"negative rate c({x},{y}) = {rate}",
            code="NEGATIVE_RATE",
            details={"x": x, "y": y, "rate": rate},
            **kwargs
        )


class DuplicateEntry(MarkovError):
    def __init__(self, x: int, y: int, **kwargs):
        super().__init__(
            f"duplicate rate entry ({x},{y})",
            code="DUPLICATE_ENTRY",
            details={"x": x, "y": y},
            **kwargs
        )


class SelfLoop(MarkovError):
    def __init__(self, x: int, **kwargs):
        super().__init__(
            f"self-loop rate at state {x}",
            code="SELF_LOOP",
            details={"x": x},
            **kwargs
        )


class NegativeTime(MarkovError):
    def __init__(self, t: float, **kwargs):
        super().__init__(f"negative time t = {t}", code="NEGATIVE_TIME", details={"t": t}, **kwargs)


class Reducible(MarkovError):
    def __init__(self, n_components: int, **kwargs):
        super().__init__(
            f"jump graph is not strongly connected ({n_components} components)",
            code="REDUCIBLE",
            details={"n_components": n_components},
            **kwargs
        )


class NotInvariant(MarkovError):
    def __init__(self, residual: float, tolerance: float, **kwargs):
        super().__init__(
            f"measure is not invariant: residual {residual:.3e} > {tolerance:.1e}",
            code="NOT_INVARIANT",
            details={"residual": residual, "tolerance": tolerance},
            **kwargs
        )


# perturbations

class NegativeDirection(PerturbationError):
    def __init__(self, min_f: float, **kwargs):
        super().__init__(
            f"direction has min f = {min_f:.6g} < 0 on a non-reversible base; "
            "shift f by a constant (shift_to_nonnegative) to keep rates nonnegative",
            code="NEGATIVE_DIRECTION",
            details={"min_f": min_f},
            **kwargs
        )


class BalanceViolation(PerturbationError):
    def __init__(self, residual: float, tolerance: float, **kwargs):
        super().__init__(
            f"b violates the balance condition: residual {residual:.3e} > {tolerance:.1e}",
            code="BALANCE_VIOLATION",
            details={"residual": residual, "tolerance": tolerance},
            **kwargs
        )


class UnboundedBelow(PerturbationError):
    def __init__(self, x: int, y: int, value: float, **kwargs):
        super().__init__(
            f"b({x},{y}) = {value:.6g} < 0 where c({x},{y}) = 0",
            code="UNBOUNDED_BELOW",
            details={"x": x, "y": y, "value": value},
            **kwargs
        )


class DeltaTooLarge(PerturbationError):
    def __init__(self, delta: float, cap: float, **kwargs):
        super().__init__(
            f"delta {delta:.6g} is outside the family's validity cap {cap:.6g}",
            code="DELTA_TOO_LARGE",
            details={"delta": delta, "cap": cap},
            **kwargs
        )


class MalformedCycle(PerturbationError):
    def __init__(self, cycle: Any, reason: str, **kwargs):
        super().__init__(
            f"malformed cycle {cycle}: {reason}",
            code="MALFORMED_CYCLE",
            details={"cycle": list(cycle) if cycle is not None else None, "reason": reason},
            **kwargs
        )


class NegativeAlpha(PerturbationError):
    def __init__(self, index: int, alpha: float, **kwargs):
        super().__init__(
            f"cycle {index} has negative weight alpha = {alpha:.6g}",
            code="NEGATIVE_ALPHA",
            details={"index": index, "alpha": alpha},
            **kwargs
        )


class Disconnected(PerturbationError):
    def __init__(self, n_components: int, **kwargs):
        super().__init__(
            f"graph is disconnected ({n_components} components)",
            code="DISCONNECTED",
            details={"n_components": n_components},
            **kwargs
        )


# response

class BadTimes(ResponseError):
    def __init__(self, message: str, **kwargs):
        super().__init__(message, code="BAD_TIMES", **kwargs)


# fdt-suite

class UnnormalizedInitial(SuiteError):
    def __init__(self, total: float, **kwargs):
        super().__init__(
            f"initial measure is not a probability measure (total mass {total:.15g})",
            code="UNNORMALIZED_INITIAL",
            details={"total": total},
            **kwargs
        )


class ModePreconditionFailed(SuiteError):
    def __init__(self, mode: str, residual: float, tolerance: float, **kwargs):
        super().__init__(
            f"mode '{mode}' precondition failed: residual {residual:.3e} > {tolerance:.1e}",
            code="MODE_PRECONDITION_FAILED",
            details={"mode": mode, "residual": residual, "tolerance": tolerance},
            **kwargs
        )


class DirectionMismatch(SuiteError):
    def __init__(self, **kwargs):
        super().__init__(
            "observable f differs from the family's perturbation direction",
            code="DIRECTION_MISMATCH",
            **kwargs
        )


class NotReversible(SuiteError):
    def __init__(self, residual: float, tolerance: float, **kwargs):
        super().__init__(
            f"generator is not reversible: residual {residual:.3e} > {tolerance:.1e}",
            code="NOT_REVERSIBLE",
            details={"residual": residual, "tolerance": tolerance},
            **kwargs
        )


class NotSymmetricFamily(SuiteError):
    def __init__(self, residual: float, tolerance: float, **kwargs):
        super().__init__(
            f"perturbed generators are not symmetric: residual {residual:.3e} > {tolerance:.1e}",
            code="NOT_SYMMETRIC_FAMILY",
            details={"residual": residual, "tolerance": tolerance},
            **kwargs
        )


class EmptyGrid(SuiteError):
    def __init__(self, name: str, **kwargs):
        super().__init__(f"grid '{name}' is empty", code="EMPTY_GRID", details={"grid": name}, **kwargs)


# diffusion-mc

class UnstableStep(SimulationError):
    def __init__(self, dt: float, drift_sup: float, **kwargs):
        super().__init__(
            f"dt * sup|b| = {dt * drift_sup:.4g} violates the stability guard (< 0.1)",
            code="UNSTABLE_STEP",
            details={"dt": dt, "drift_sup": drift_sup},
            **kwargs
        )


class RateNegative(SimulationError):
    def __init__(self, n_grid: int, min_rate: float, **kwargs):
        super().__init__(
            f"grid with n_grid={n_grid} is too coarse for the drift (min rate {min_rate:.4g})",
            code="RATE_NEGATIVE",
            details={"n_grid": n_grid, "min_rate": min_rate},
            **kwargs
        )


# model files

class ParseError(ModelError):
    def __init__(self, message: str, *, line: int | None = None, column: int | None = None, **kwargs):
        location = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(
            f"{message}{location}",
            code="PARSE_ERROR",
            details={"line": line, "column": column},
            **kwargs
        )


class ValidationError(ModelError):
    def __init__(self, message: str, **kwargs):
        super().__init__(message, code=kwargs.pop("code", "VALIDATION_ERROR"), **kwargs)
