"""Exception types shared across the package."""

from __future__ import annotations


class InvalidInputError(ValueError):
    """Caller-supplied parameters are out of range or inconsistent."""


class ParseError(ValueError):
    """Serialized payload (JSON or binary) is malformed or truncated."""


class ValidationError(ValueError):
    """A constructed object fails its defining numerical invariants."""


class InfeasibleScaleError(RuntimeError):
    """Requested computation exceeds the configured size budget."""


class ConvergenceFailure(RuntimeError):
    """Iterative optimization stalled before reaching its target.

    The best iterate found so far is attached as ``best`` so callers can
    still inspect partial progress.
    """

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best
