"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ConfigError(ValueError):
    """A study or model configuration is invalid."""


class BudgetError(RuntimeError):
    """A design would exceed the configured point budget."""

    def __init__(self, level, n_points, budget):
        self.level = level
        self.n_points = n_points
        self.budget = budget
        super().__init__(
            f"sparse grid of level {level} has {n_points} points, "
            f"exceeding the budget of {budget}"
        )


class NumericalError(ArithmeticError):
    """A linear system could not be solved to the required accuracy."""


class SingularModelError(NumericalError):
    """The design gram matrix is singular even after the jitter ladder."""

    def __init__(self, message, duplicates=(), jitter=None):
        self.duplicates = list(duplicates)
        self.jitter = jitter
        super().__init__(message)
