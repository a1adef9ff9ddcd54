"""Unit tests for error mapper."""

import pytest
from pydantic import ValidationError

from sim_secrecy.config import ScenarioConfig
from sim_secrecy.core.exceptions import (
    CheckpointError,
    ConfigError,
    DimensionMismatchError,
    EmptyBufferError,
    InvalidSweepAxisError,
    LayerIndexError,
    NumericDivergenceError,
    RunNotFoundError,
    UnknownStrategyError,
)
from sim_secrecy.utils.error_mapper import (
    SUGGESTIONS,
    ErrorCode,
    create_error_response,
    exit_code_for,
    map_error,
)


def _validation_error() -> ValidationError:
    try:
        ScenarioConfig(atoms_per_layer=5)
    except ValidationError as e:
        return e
    raise AssertionError("expected a validation failure")


class TestErrorCodeMapping:
    """Tests for exception to error code mapping."""

    @pytest.mark.parametrize(
        "exc, expected",
        [
            (ConfigError("cfg.json", "file not found"), ErrorCode.CONFIG_INVALID),
            (UnknownStrategyError(4), ErrorCode.UNKNOWN_STRATEGY),
            (InvalidSweepAxisError("foo", ["pmax"]), ErrorCode.INVALID_SWEEP_AXIS),
            (LayerIndexError(5, 4), ErrorCode.INVALID_GEOMETRY),
            (DimensionMismatchError("powers", 2, 3), ErrorCode.DIMENSION_MISMATCH),
            (NumericDivergenceError(3, "policy loss", float("nan")), ErrorCode.NUMERIC_DIVERGENCE),
            (EmptyBufferError(), ErrorCode.EMPTY_BUFFER),
            (CheckpointError("a.npz", "bad"), ErrorCode.CHECKPOINT_INVALID),
            (RunNotFoundError("run_x"), ErrorCode.RUN_NOT_FOUND),
        ],
    )
    def test_domain_errors(self, exc, expected):
        """Should map each domain exception to its code and keep the message."""
        code, message = map_error(exc)

        assert code == expected
        assert message == str(exc)

    def test_map_validation_error(self):
        """Should map pydantic validation errors to CONFIG_INVALID."""
        code, message = map_error(_validation_error())

        assert code == ErrorCode.CONFIG_INVALID
        assert "perfect square" in message

    def test_map_value_error(self):
        """Should map a plain ValueError to INVALID_ARGUMENT."""
        code, _ = map_error(ValueError("empty value list"))

        assert code == ErrorCode.INVALID_ARGUMENT

    def test_map_unknown_error(self):
        """Should map unknown exceptions to UNKNOWN_ERROR."""
        code, message = map_error(RuntimeError("Something went wrong"))

        assert code == ErrorCode.UNKNOWN_ERROR
        assert "Something went wrong" in message


class TestExitCodes:
    """Tests for process exit codes."""

    @pytest.mark.parametrize(
        "exc, expected",
        [
            (ConfigError(None, "bad"), 2),
            (UnknownStrategyError("strategy9"), 2),
            (InvalidSweepAxisError("foo", ["pmax"]), 2),
            (ValueError("no values"), 2),
            (NumericDivergenceError(1, "value loss", float("inf")), 3),
            (CheckpointError("a.npz", "bad"), 1),
            (RuntimeError("boom"), 1),
        ],
    )
    def test_exit_codes(self, exc, expected):
        """Should exit 2 on configuration errors, 3 on divergence and 1 otherwise."""
        assert exit_code_for(exc) == expected

    def test_validation_error_is_config(self):
        """Should treat a pydantic validation failure as a configuration error."""
        assert exit_code_for(_validation_error()) == 2


class TestErrorResponse:
    """Tests for error response creation."""

    def test_create_error_response(self):
        """Should create structured error response."""
        response = create_error_response(
            ErrorCode.RUN_NOT_FOUND,
            "Run not found: run_123",
        )

        assert response.error_code == "RUN_NOT_FOUND"
        assert response.message == "Run not found: run_123"
        assert response.suggestion == SUGGESTIONS[ErrorCode.RUN_NOT_FOUND]

    def test_error_response_to_dict(self):
        """Should convert error response to dictionary."""
        response = create_error_response(
            ErrorCode.UNKNOWN_STRATEGY,
            "Unknown strategy or method: 4",
            details={"strategy": 4},
        )
        result = response.to_dict()

        assert result["success"] is False
        assert result["error"]["code"] == "UNKNOWN_STRATEGY"
        assert result["error"]["details"] == {"strategy": 4}
        assert "suggestion" in result["error"]

    def test_error_response_without_suggestion(self):
        """Should omit the suggestion for codes without one."""
        result = create_error_response(ErrorCode.UNKNOWN_ERROR, "boom").to_dict()

        assert "suggestion" not in result["error"]
        assert "details" not in result["error"]
