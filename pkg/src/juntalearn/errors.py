"""Exception types shared across the package."""


class JuntaError(Exception):
    """Base class for all package errors."""


class DimensionError(JuntaError, ValueError):
    """Operands live on hypercubes of different dimension."""


class InvalidPmfError(JuntaError, ValueError):
    """Array is not a probability mass function."""


class ContractError(JuntaError):
    """A sample-size or promise precondition was violated.

    Raised instead of silently running with weaker guarantees.
    """


class NoCandidate(JuntaError):
    """No candidate cleared the noise search before its floor was reached."""


class SearchFloorReached(JuntaError):
    """An exponential noise search exhausted its schedule without certifying."""
