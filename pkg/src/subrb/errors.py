"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration problems exit 2,
capability/cap limits exit 3, and numerical diagnostics exit 4.
"""

from __future__ import annotations


class SubrbError(Exception):
    """Base class for package errors."""


class ConfigError(SubrbError, ValueError):
    """Malformed user input: bad config field, unparseable Pauli string, bad weights."""


class CapExceededError(SubrbError, RuntimeError):
    """An enumeration grew past its configured cap.

    Carries ``count`` — the number of elements reached when the cap tripped.
    """

    def __init__(self, message: str, count: int | None = None):
        super().__init__(message)
        self.count = count


class NonUniformCensusError(SubrbError, RuntimeError):
    """Anticommutation counts differ between representatives of one block.

    Cannot happen for genuine group orbits; raised as a diagnostic if a
    decomposition that is not orbit-derived is fed into the census.
    """


class DegenerateFitError(SubrbError, RuntimeError):
    """Decay data carries no usable signal (constant data, too few lengths)."""


class VerificationError(SubrbError, RuntimeError):
    """A numerical cross-check (e.g. dual-route twirl comparison) failed."""
