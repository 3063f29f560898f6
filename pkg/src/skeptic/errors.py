"""Exception hierarchy shared across the package."""


class SkepticError(Exception):
    """Base class for all errors raised by this package."""


class InputError(SkepticError, ValueError):
    """Input data failed validation (non-finite values, bad shapes, ...)."""


class UndefinedCorrelationError(InputError):
    """A correlation is undefined because a column has zero rank variance."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class PreconditionError(SkepticError, ValueError):
    """A solver precondition does not hold, e.g. a non-PSD input to glasso."""


class SolverError(SkepticError, RuntimeError):
    """A numerical solver failed."""


class ConvergenceError(SolverError):
    """Iteration limit reached; ``last_iterate`` holds the final state."""

    def __init__(self, message, last_iterate=None, iterations=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.iterations = iterations
        self.residual = residual


class InfeasibleError(SolverError):
    """A constrained problem has no feasible point at the requested level.

    ``min_feasible`` is the smallest constraint level for which the problem
    becomes feasible, when it could be computed.
    """

    def __init__(self, message, column=None, min_feasible=None):
        super().__init__(message)
        self.column = column
        self.min_feasible = min_feasible


class SingularityError(SolverError):
    """A residual variance or pivot is numerically zero."""
