"""Exception hierarchy.

Each class maps to one CLI exit code, see :mod:`exchev.cli`.
"""


class ExchevError(Exception):
    """Base class for all package errors."""


class InvariantError(ExchevError, ValueError):
    """An input violates a documented invariant.

    Parameters
    ----------
    invariant : str
        Short name of the violated invariant, e.g. ``"barycenter"``.
    message : str
        Human readable detail.
    """

    def __init__(self, invariant, message):
        self.invariant = invariant
        super().__init__(f"[{invariant}] {message}")


class CapacityError(InvariantError):
    """A finite enumeration would exceed its hard cap."""


class QuadratureError(ExchevError, ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class SamplerError(ExchevError, RuntimeError):
    """A sampler could not complete (e.g. event cap exceeded)."""
