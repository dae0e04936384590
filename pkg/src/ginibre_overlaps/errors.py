"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class QuadratureConvergenceError(RuntimeError):
    """Adaptive integration ran out of subdivisions before reaching tolerance.

    Carries the best available estimate so callers can decide whether to
    accept it anyway.
    """

    def __init__(self, message, value, err_est):
        super().__init__(message)
        self.value = value
        self.err_est = err_est


class DegenerateSampleError(RuntimeError):
    """A sampled matrix is too close to having a multiple eigenvalue."""


class EmptyWindowError(RuntimeError):
    """A sampling campaign produced no eigenvalues inside the window."""


class InsufficientSamplesError(RuntimeError):
    """Too few samples for the requested statistical comparison."""
