"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class ConvergenceError(RuntimeError):
    """A numerical procedure failed to reach the requested tolerance.

    Carries the best available estimate and an error bound so callers can
    decide whether the partial result is still usable.
    """

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class UnsupportedMethodError(RuntimeError):
    """The requested computational route does not apply to this model
    (e.g. Bernstein factorization of a kernel that is not completely
    monotone)."""
