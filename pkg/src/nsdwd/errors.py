"""Exception types shared across the package."""

from __future__ import annotations


class EmptyCorpusError(ValueError):
    """Raised when a corpus stream contains no tokens."""


class ZeroGradientError(ValueError):
    """Raised when a steepest-descent direction is requested for a zero gradient.

    Optimizer loops treat this situation as convergence and stop before it
    can occur; direct callers see the exception.
    """


class DivergenceError(RuntimeError):
    """Raised when an optimizer run produces a non-finite loss."""

    def __init__(self, t: int, message: str | None = None):
        self.t = t
        super().__init__(message or f"non-finite loss at iteration {t}")


class PowerIterationError(RuntimeError):
    """Raised when power iteration fails to converge within its budget."""


class ConfigMismatchError(ValueError):
    """Raised when run logs do not match the analysis report they are checked against."""
