"""Exception types shared across the package.

The CLI maps each class onto a process exit code.
"""


class ValidationError(ValueError):
    """Input violates a documented precondition (exit code 1)."""


class NumericalError(ArithmeticError):
    """A numerical routine failed to reach its accuracy target (exit code 2)."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class BudgetExceeded(RuntimeError):
    """An exhaustive computation would exceed its configured budget (exit code 3)."""

    def __init__(self, message, required=None, budget=None):
        super().__init__(message)
        self.required = required
        self.budget = budget
