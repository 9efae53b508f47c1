"""Exception types raised by the backflow package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ConvergenceError(RuntimeError):
    """An iterative eigensolver did not reach its residual target.

    ``best_residual`` holds the smallest residual norm seen before giving up.
    """

    def __init__(self, message, best_residual=float("nan")):
        super().__init__(message)
        self.best_residual = best_residual


class BudgetExceededError(RuntimeError):
    """The convergence controller ran out of node or window budget.

    Carries the best estimate reached so far so that callers can still
    report something useful.
    """

    def __init__(self, message, best_estimate=float("nan"), error_estimate=float("inf")):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


class TruncationError(RuntimeError):
    """The position window lost more probability than allowed."""

    def __init__(self, message, leak):
        super().__init__(message)
        self.leak = leak
