"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class InvalidStateError(ValueError):
    """A set of quantum numbers does not label a valid Bethe state."""


class PoleError(ZeroDivisionError):
    """Evaluation was requested on (or numerically at) a pole."""


class SolverError(RuntimeError):
    """A root finder could not bracket or converge."""


class NonConvergenceError(RuntimeError):
    """An iterative refinement hit its cap; ``history`` holds what was tried."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class BudgetExceededError(RuntimeError):
    """A brute-force enumeration would exceed the configured state budget."""
