"""Exception types raised across the package."""


class KernelLabError(Exception):
    """Base class for all errors raised by kil."""


class EmptyGrid(KernelLabError, ValueError):
    pass


class TooFewPoints(KernelLabError, ValueError):
    pass


class DuplicateCenters(KernelLabError, ValueError):
    pass


class NumericalFailure(KernelLabError, ArithmeticError):
    pass


class IllConditioned(NumericalFailure):
    """Cholesky factorization broke down; retry with ``ridge > 0``."""


class EvaluationFailure(NumericalFailure):
    """A field returned a non-finite value at a quadrature node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class NotPositive(NumericalFailure):
    pass


class BelowPowerThreshold(KernelLabError, ValueError):
    pass


class ZeroField(KernelLabError, ValueError):
    pass


class InsufficientData(KernelLabError, ValueError):
    pass
