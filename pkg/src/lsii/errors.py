"""Exception taxonomy shared by all estimation and resampling routines."""


class LsiiError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(LsiiError, ValueError):
    """An argument violates a documented precondition."""


class OutOfBoundsError(InvalidArgumentError):
    """A parameter lies outside its admissible box."""


class DegenerateInputError(LsiiError, ValueError):
    """Input data make the requested statistic undefined (e.g. zero
    denominator, singular Gram matrix, constant series)."""


class ConvergenceFailure(LsiiError, RuntimeError):
    """An iterative fit failed to converge.

    The best point found is attached so callers can decide whether to
    keep it (the L-II objective treats it as an infinite penalty).
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class StudyFailure(LsiiError, RuntimeError):
    """Too many replications of a study failed; partial results attached."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
