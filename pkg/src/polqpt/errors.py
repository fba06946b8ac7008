"""Exception types raised across the package."""


class PolQPTError(Exception):
    """Base class for package errors."""


class UnphysicalStateError(PolQPTError, ValueError):
    """A Stokes vector or matrix lies outside the set of physical states."""


class ModeOverflowError(PolQPTError):
    """A crystal would shift amplitude past the last supported temporal mode."""


class DegenerateDataError(PolQPTError, ValueError):
    """Count data cannot determine the quantity asked for (e.g. an empty basis)."""


class IllConditionedInputsError(PolQPTError, ValueError):
    """Tomography input states do not span the required space."""


class ConvergenceError(PolQPTError):
    """The maximum-likelihood search did not converge.

    The best iterate found is kept on ``best`` so callers can still inspect it.
    """

    def __init__(self, message, best=None, n_iterations=None):
        super().__init__(message)
        self.best = best
        self.n_iterations = n_iterations
