class InvalidSpecError(ValueError):
    """A field, window, test function or config violates its invariants."""


class PreconditionError(ValueError):
    """An operation was called outside its domain (e.g. window does not cover a region)."""


class _NamedParameterError(RuntimeError):
    def __init__(self, message, parameter=None):
        super().__init__(message)
        self.parameter = parameter


class ResourceError(_NamedParameterError):
    """The requested window or batch exceeds the memory budget."""


class FeasibilityError(_NamedParameterError):
    """An exact enumeration would exceed its size cap."""


class NumericalAccuracyError(ArithmeticError):
    """Quadrature refinement hit its panel cap without converging."""

    def __init__(self, message, estimates=None):
        super().__init__(message)
        self.estimates = estimates
