"""Exception types shared across the package."""

from __future__ import annotations


class ConfigurationError(ValueError):
    """A run was set up with inconsistent or unsupported parameters."""


class ParseError(ValueError):
    """A config or data file could not be parsed."""


class NumericalError(RuntimeError):
    """An iterative solver or estimator failed to reach its target."""


class LevelCapError(NumericalError):
    """The adaptive driver hit its level cap; carries the partial result."""

    def __init__(self, message: str, partial_result=None):
        super().__init__(message)
        self.partial_result = partial_result
