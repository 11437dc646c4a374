"""Domain-specific exceptions for window game solving."""
from typing import Optional


class WindowGameError(Exception):
    """Base exception for all window game errors."""

    pass


class ValidationError(WindowGameError):
    """Exception raised when a model violates one of its invariants."""

    pass


class ParseError(ValidationError):
    """Exception raised when a text format cannot be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NotFoundError(WindowGameError):
    """Exception raised when a state, action or observation is unknown."""

    pass


class RangeError(WindowGameError):
    """Exception raised when integer arithmetic leaves the supported range."""

    pass


class UndecidableObjectiveError(WindowGameError):
    """Exception raised when a bounded window objective is handed to a solver."""

    pass


class ResourceLimitError(WindowGameError):
    """Exception raised when a construction exceeds the configured state limit."""

    pass


class LassoError(ValidationError):
    """Exception raised when an abstract lasso is not a play of the arena."""

    pass


class CrosscheckError(WindowGameError):
    """Exception raised when two engines disagree on a generated instance."""

    pass
