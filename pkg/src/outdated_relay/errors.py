"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """A parameter is outside its legal domain."""


class NonConvergenceError(ArithmeticError):
    """A numerical routine failed to reach its requested tolerance."""


class ValidationError(AssertionError):
    """A self-consistency check of the analytic engine failed."""
