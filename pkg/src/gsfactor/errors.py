"""Exception hierarchy shared by the library and the CLI.

The CLI maps :class:`ValidationError` to exit code 1 and
:class:`NumericalError` to exit code 2.
"""


class GSError(Exception):
    """Base class for all errors raised by gsfactor."""


class ValidationError(GSError, ValueError):
    """Inputs violate a precondition (shapes, dimensions, parameters)."""


class NumericalError(GSError, ArithmeticError):
    """A computation could not be carried out reliably."""


class WindowError(NumericalError):
    """Grid data does not decay inside the sampling window."""


class DegenerateFitError(NumericalError):
    """Not enough usable samples for a least-squares fit."""
