"""Exception hierarchy.

Validation problems and numerical failures are kept apart so the CLI can map
them onto distinct exit codes.
"""


class GribovError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(GribovError, ValueError):
    """Invalid couplings, grids or arguments (caught before any numerics)."""


class DomainError(ParameterError):
    """An evaluation point lies outside the domain of a kernel or weight."""


class NumericalError(GribovError, ArithmeticError):
    """Quadrature or eigen-solver failure, overflow, lost positivity."""


class ConvergenceError(NumericalError):
    """An iterative procedure exhausted its budget."""
