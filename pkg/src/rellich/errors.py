"""Exception hierarchy shared by every computation in the package."""


class RellichError(Exception):
    """Base class for all package errors."""


class InvalidInput(RellichError, ValueError):
    """An argument violates a precondition (dimension, angle, grid size...)."""


class NumericalFailure(RellichError, ArithmeticError):
    """A computation could not deliver a trustworthy number."""


class InsufficientSpectrum(NumericalFailure):
    """The supplied spectrum is truncated too low to certify a minimum."""


class NoRootError(NumericalFailure):
    """A root-finding target lies outside the achievable window."""


class HypothesisError(NumericalFailure):
    """A hypothesis required by the computation does not hold."""


class DegenerateInput(NumericalFailure):
    """The input is degenerate for the requested quantity (e.g. w_s == 0)."""
