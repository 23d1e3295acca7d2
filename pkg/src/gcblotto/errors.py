"""Exception hierarchy shared by the solver, oracle and CLI."""


class BlottoError(Exception):
    """Base class for every error raised by gcblotto."""


class ValidationError(BlottoError, ValueError):
    """A game instance or configuration violates a precondition."""


class NormalizationError(ValidationError):
    pass


class ResourceBoundError(ValidationError):
    pass


class DimensionError(BlottoError, ValueError):
    pass


class SingularityError(BlottoError, ArithmeticError):
    pass


class ConvergenceError(BlottoError, RuntimeError):
    pass


class ThresholdError(BlottoError):
    """D*k is below the level at which the positive-root equilibrium is proven."""

    def __init__(self, message, required=None, actual=None):
        super().__init__(message)
        self.required = required
        self.actual = actual


class NoSolutionError(BlottoError):
    """f_k(z_n) = D has no real root because D lies below the minimum of f_k."""


class BaseAllocationError(ValidationError):
    pass


class GridError(BlottoError, ValueError):
    pass


class GridTooLargeError(GridError):
    def __init__(self, message, size=None):
        super().__init__(message)
        self.size = size


class StationarityError(BlottoError):
    pass


class ParseError(BlottoError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class RangeError(BlottoError, ValueError):
    pass
