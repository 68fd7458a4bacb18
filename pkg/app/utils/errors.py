"""
Exceptions raised across the lab.

They subclass the builtins callers already catch (ValueError, RuntimeError),
so `except ValueError` keeps working around any lab call.
"""

from typing import Optional


class ConfigurationError(ValueError):
    """Invalid parameters or experiment configuration."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class IncompatibleSpacesError(ValueError):
    """A field and a norm (or two fields) live on different bases."""


class DomainError(ValueError):
    """A parameter lies outside the mathematical domain of an operation."""


class ReferenceResolutionError(ValueError):
    """A truncation level exceeds the reference resolution n_ref."""


class BudgetExceededError(RuntimeError):
    """The estimated cost of a run is above the configured budget."""
