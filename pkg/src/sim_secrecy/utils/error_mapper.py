"""Map simulator exceptions to structured error codes, recovery hints and exit codes."""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from pydantic import ValidationError

from ..core.exceptions import (
    CheckpointError,
    ConfigError,
    DimensionMismatchError,
    EmptyBufferError,
    EmptyTrajectoryError,
    GeometryError,
    InvalidSweepAxisError,
    LayerIndexError,
    NumericDivergenceError,
    RunLimitError,
    RunNotFoundError,
    UnknownStrategyError,
)


class ErrorCode(str, Enum):
    """Error codes shared by the CLI and the MCP tools."""

    # Configuration errors
    CONFIG_INVALID = "CONFIG_INVALID"
    UNKNOWN_STRATEGY = "UNKNOWN_STRATEGY"
    INVALID_SWEEP_AXIS = "INVALID_SWEEP_AXIS"

    # Physics errors
    INVALID_GEOMETRY = "INVALID_GEOMETRY"
    DIMENSION_MISMATCH = "DIMENSION_MISMATCH"

    # Training errors
    NUMERIC_DIVERGENCE = "NUMERIC_DIVERGENCE"
    EMPTY_TRAJECTORY = "EMPTY_TRAJECTORY"
    EMPTY_BUFFER = "EMPTY_BUFFER"
    CHECKPOINT_INVALID = "CHECKPOINT_INVALID"

    # Run errors
    RUN_NOT_FOUND = "RUN_NOT_FOUND"
    RUN_LIMIT_REACHED = "RUN_LIMIT_REACHED"

    # Generic errors
    INVALID_ARGUMENT = "INVALID_ARGUMENT"
    UNKNOWN_ERROR = "UNKNOWN_ERROR"


EXCEPTION_MAP: dict[type[Exception], ErrorCode] = {
    ConfigError: ErrorCode.CONFIG_INVALID,
    ValidationError: ErrorCode.CONFIG_INVALID,
    UnknownStrategyError: ErrorCode.UNKNOWN_STRATEGY,
    InvalidSweepAxisError: ErrorCode.INVALID_SWEEP_AXIS,
    GeometryError: ErrorCode.INVALID_GEOMETRY,
    LayerIndexError: ErrorCode.INVALID_GEOMETRY,
    DimensionMismatchError: ErrorCode.DIMENSION_MISMATCH,
    NumericDivergenceError: ErrorCode.NUMERIC_DIVERGENCE,
    EmptyTrajectoryError: ErrorCode.EMPTY_TRAJECTORY,
    EmptyBufferError: ErrorCode.EMPTY_BUFFER,
    CheckpointError: ErrorCode.CHECKPOINT_INVALID,
    RunNotFoundError: ErrorCode.RUN_NOT_FOUND,
    RunLimitError: ErrorCode.RUN_LIMIT_REACHED,
    ValueError: ErrorCode.INVALID_ARGUMENT,
}

# Process exit codes; anything not listed exits with 1
EXIT_CODES: dict[ErrorCode, int] = {
    ErrorCode.CONFIG_INVALID: 2,
    ErrorCode.UNKNOWN_STRATEGY: 2,
    ErrorCode.INVALID_SWEEP_AXIS: 2,
    ErrorCode.INVALID_ARGUMENT: 2,
    ErrorCode.NUMERIC_DIVERGENCE: 3,
}

SUGGESTIONS: dict[ErrorCode, str] = {
    ErrorCode.CONFIG_INVALID: (
        "The experiment config could not be loaded. Check the path, the JSON syntax and "
        "that every key belongs to the scenario, trainer or ablation blocks."
    ),
    ErrorCode.UNKNOWN_STRATEGY: "Static strategies are numbered 1, 2 and 3.",
    ErrorCode.INVALID_SWEEP_AXIS: (
        "Use one of the sweep axes pmax, kappa, m, n, lr, batch, depth with a non-empty "
        "comma-separated value list."
    ),
    ErrorCode.INVALID_GEOMETRY: (
        "The SIM layout is invalid. Atoms per layer must be a perfect square and layer "
        "indices must lie in 1..M."
    ),
    ErrorCode.DIMENSION_MISMATCH: (
        "Array sizes disagree. Make sure phases are M x N and one power is given per user."
    ),
    ErrorCode.NUMERIC_DIVERGENCE: (
        "Training produced a non-finite value. Lower the learning rate or the clip range "
        "and rerun with the same seed to reproduce."
    ),
    ErrorCode.EMPTY_BUFFER: "Collect warm-up episodes before sampling from the replay buffer.",
    ErrorCode.CHECKPOINT_INVALID: (
        "The checkpoint does not match this network. Evaluate it with the config it was "
        "trained with."
    ),
    ErrorCode.RUN_NOT_FOUND: (
        "The run ID is unknown or the finished run was pruned. Use list_runs to see "
        "available runs."
    ),
    ErrorCode.RUN_LIMIT_REACHED: (
        "Maximum number of concurrent runs reached. Wait for a run to finish with get_run."
    ),
    ErrorCode.INVALID_ARGUMENT: "Invalid argument provided. Check parameter types and values.",
}


@dataclass
class ToolErrorResponse:
    """Structured error response for MCP tools."""

    error_code: str
    message: str
    suggestion: Optional[str] = None
    details: Optional[dict] = None

    def to_dict(self) -> dict:
        result = {
            "success": False,
            "error": {
                "code": self.error_code,
                "message": self.message,
            },
        }
        if self.suggestion:
            result["error"]["suggestion"] = self.suggestion
        if self.details:
            result["error"]["details"] = self.details
        return result


def map_error(exc: Exception) -> tuple[ErrorCode, str]:
    """
    Map an exception to an error code and message.

    Args:
        exc: The exception to map

    Returns:
        Tuple of (ErrorCode, error message)
    """
    exc_type = type(exc)
    if exc_type in EXCEPTION_MAP:
        return EXCEPTION_MAP[exc_type], str(exc)

    for exc_class, code in EXCEPTION_MAP.items():
        if isinstance(exc, exc_class):
            return code, str(exc)

    return ErrorCode.UNKNOWN_ERROR, str(exc)


def exit_code_for(exc: Exception) -> int:
    """Process exit code for an exception: 2 config, 3 divergence, 1 otherwise."""
    code, _ = map_error(exc)
    return EXIT_CODES.get(code, 1)


def create_error_response(
    code: ErrorCode,
    message: str,
    details: Optional[dict] = None,
) -> ToolErrorResponse:
    """Create a structured error response with the matching suggestion."""
    return ToolErrorResponse(
        error_code=code.value,
        message=message,
        suggestion=SUGGESTIONS.get(code),
        details=details,
    )
