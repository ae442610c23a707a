"""Exception types shared across the package."""


class DataFormatError(ValueError):
    """Input data (CSV rows, columns, configuration) cannot be used."""


class NumericalError(ArithmeticError):
    """A numerical routine cannot meet its contract (degenerate input,
    inconsistent variance assembly, ...)."""


class QuadratureError(NumericalError):
    """Adaptive quadrature failed to reach the requested tolerance."""
