"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Arguments violate a documented precondition."""


class UnsupportedOrderError(InvalidInputError):
    """An expansion order beyond the implemented range was requested."""


class AccuracyError(RuntimeError):
    """A numeric routine could not meet its accuracy target.

    Carries the best value obtained and the achieved error estimate so the
    caller can decide whether the result is still usable.
    """

    def __init__(self, message, value=None, estimate=None):
        super().__init__(message)
        self.value = value
        self.estimate = estimate


class ConditioningError(RuntimeError):
    """A least-squares design matrix is rank deficient or unusably ill
    conditioned."""


class ConsistencyError(RuntimeError):
    """Two independent computations of the same quantity disagree."""
