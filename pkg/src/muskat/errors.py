"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid parameters, grids, quadrature layouts or run configs."""


class NumericError(ArithmeticError):
    """Non-finite values encountered in a computation."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class WeightError(ValueError):
    """A Fourier weight produced non-finite or invalid values."""
