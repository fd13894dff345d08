"""
Errors raised by the reduced basis toolkit.
"""


class ReducedBasisError(Exception):
    """Base class for all toolkit errors."""


class InvalidArgumentError(ReducedBasisError, ValueError):
    """An argument violates an operation's precondition."""


class ConfigurationError(InvalidArgumentError):
    """An experiment configuration is not usable."""


class NumericalBreakdownError(ReducedBasisError, ArithmeticError):
    """Floating point evaluation left the regime where the algorithm is defined."""


class SolverFailureError(ReducedBasisError):
    """An iterative solve did not reach its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
