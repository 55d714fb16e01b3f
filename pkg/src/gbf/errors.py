"""Exception hierarchy.

Validation problems (bad arguments, violated preconditions) derive from
``ValueError``; numerical breakdowns derive from ``ArithmeticError``.  The
CLI maps the first family to exit code 2 and the second to exit code 3.
"""


class GBFError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(GBFError, ValueError):
    """An input violates a documented precondition."""


class InsufficientDataError(ValidationError):
    """Too few observations for the requested model dimension."""


class HyperparameterError(ValidationError):
    """The beta-prime hyperparameters are infeasible for (n, j)."""


class NumericalError(GBFError, ArithmeticError):
    """A numerical routine could not produce a trustworthy answer."""


class SingularDesignError(NumericalError):
    """Selected design columns are (numerically) rank deficient."""


class DegenerateFitError(NumericalError):
    """The fit interpolates the response (R^2 = 1)."""


class OracleFailureError(NumericalError):
    """Quadrature did not converge."""


class RootFailureError(NumericalError):
    """Bracketed root search did not converge."""
