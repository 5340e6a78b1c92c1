"""
Custom exceptions for the SalNet pipeline.

Centralized exception hierarchy. Every error carries the CLI exit code it
maps to, so only ``salnet.cli`` decides how a failure terminates a run.
"""

from typing import Any, Dict, Optional


class SalNetError(Exception):
    """Base exception for all pipeline errors."""

    exit_code: int = 1

    def __init__(
        self,
        message: str,
        details: Optional[Dict[str, Any]] = None,
        original_error: Optional[Exception] = None,
    ):
        """
        Initialize base exception.

        Args:
            message: Human-readable error message
            details: Additional context (dict)
            original_error: Original exception if wrapped
        """
        super().__init__(message)
        self.message = message
        self.details = details or {}
        self.original_error = original_error

    def __str__(self) -> str:
        """String representation with details."""
        base = self.message
        if self.details:
            base += f" | Details: {self.details}"
        if self.original_error:
            base += f" | Caused by: {type(self.original_error).__name__}"
        return base


# ---------------------------------------------------------------------------
# Configuration (exit 2)
# ---------------------------------------------------------------------------


class ConfigurationError(SalNetError):
    """Run configuration or settings error."""

    exit_code = 2


class ParameterRangeError(ConfigurationError):
    """An operation parameter is outside its admissible range."""

    pass


# ---------------------------------------------------------------------------
# Data (exit 3)
# ---------------------------------------------------------------------------


class DataError(SalNetError):
    """Dataset, mask or checkpoint input problem."""

    exit_code = 3


class UnreadableFileError(DataError):
    """A file could not be read or parsed."""

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
        original_error: Optional[Exception] = None,
    ):
        super().__init__(message, details, original_error)
        self.path = path

    def __str__(self) -> str:
        base = super().__str__()
        if self.path:
            base = f"[{self.path}] {base}"
        return base


class EmptyClassError(DataError):
    """A class directory contains no images."""

    pass


class InsufficientDataError(DataError):
    """Not enough classes or images to form an episode."""

    pass


class EmptyEpisodeError(DataError):
    """An episode yields no query-support pairs to score."""

    pass


class MissingOracleError(DataError):
    """An image has no stored mask for the requested backend."""

    pass


class MissingTeacherError(DataError):
    """TriR is enabled but no teacher checkpoint is available."""

    pass


class CheckpointError(DataError):
    """Checkpoint has a bad header or does not match the model shapes."""

    pass


# ---------------------------------------------------------------------------
# Numerics (exit 4)
# ---------------------------------------------------------------------------


class NumericError(SalNetError):
    """Non-finite values in the computation."""

    exit_code = 4


class NonFiniteError(NumericError):
    """A node output or gradient contains NaN/Inf."""

    pass


class DivergenceError(NumericError):
    """Training loss became non-finite."""

    pass


# ---------------------------------------------------------------------------
# Graph misuse
# ---------------------------------------------------------------------------


class GraphError(SalNetError):
    """Differentiation graph used incorrectly."""

    pass


class ShapeMismatchError(GraphError):
    """Operand shapes do not match an operation's signature."""

    def __init__(
        self,
        message: str,
        node: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
        original_error: Optional[Exception] = None,
    ):
        super().__init__(message, details, original_error)
        self.node = node

    def __str__(self) -> str:
        base = super().__str__()
        if self.node:
            base = f"[{self.node}] {base}"
        return base


class BackwardBeforeForwardError(GraphError):
    """Backward requested before a forward pass was recorded."""

    pass


class ConstraintViolationError(GraphError):
    """A real foreground/background pair does not reconstruct its image."""

    pass


__all__ = [
    "SalNetError",
    "ConfigurationError",
    "ParameterRangeError",
    "DataError",
    "UnreadableFileError",
    "EmptyClassError",
    "InsufficientDataError",
    "EmptyEpisodeError",
    "MissingOracleError",
    "MissingTeacherError",
    "CheckpointError",
    "NumericError",
    "NonFiniteError",
    "DivergenceError",
    "GraphError",
    "ShapeMismatchError",
    "BackwardBeforeForwardError",
    "ConstraintViolationError",
]
