"""Exception hierarchy shared by all modules."""


class WishartQBQError(Exception):
    """Base class for every error raised by this package."""

    category = "error"


class InvalidDimensionError(WishartQBQError, ValueError):
    category = "invalid-dimension"


class InvalidParameterError(WishartQBQError, ValueError):
    category = "invalid-parameter"


class CaseMismatchError(InvalidParameterError):
    """A special-case formula was requested for inputs that do not satisfy it."""

    category = "case-mismatch"


class SizeCapError(InvalidParameterError):
    category = "size-cap"


class NumericalFailureError(WishartQBQError, ArithmeticError):
    category = "numerical-failure"


class DivergenceError(NumericalFailureError):
    """Raised when an SGD iterate leaves the divergence radius.

    Parameters
    ----------
    iteration : int
        Index of the first iterate whose norm exceeded the threshold.
    norm : float
        Norm of that iterate.
    """

    category = "divergence"

    def __init__(self, iteration, norm):
        super().__init__(f"iterate norm {norm:.3e} exceeded bound at iteration {iteration}")
        self.iteration = iteration
        self.norm = norm


class ConfigError(WishartQBQError, ValueError):
    category = "config"
