"""Shared utilities for the SIM secrecy simulator."""

from .error_mapper import ErrorCode, exit_code_for, map_error
from .units import db_to_linear, dbm_to_watts

__all__ = [
    "ErrorCode",
    "exit_code_for",
    "map_error",
    "db_to_linear",
    "dbm_to_watts",
]
