"""Exception types shared across the package."""


class KslabError(Exception):
    """Base class for all library errors."""


class DomainError(KslabError, ValueError):
    """An argument is outside the documented domain of an operation."""


class CapacityError(KslabError, ValueError):
    """A request exceeds a hard size/budget limit of an operation."""


class InvalidDensityError(KslabError, ValueError):
    """A requested model is not a probability density (1 + f dips below 0).

    ``cell`` holds the (x_lo, x_hi) interval on which the violation occurs,
    when known.
    """

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class NonInvertibleCdfError(KslabError, ValueError):
    """The model CDF is not strictly increasing, so sampling by inversion
    is not well defined."""
