"""Exception hierarchy shared by every module of the package."""


class ErnstLaxError(Exception):
    """Base class for all package errors."""


class AxisViolation(ErnstLaxError, ValueError):
    pass


class DegenerateGrid(ErnstLaxError, ValueError):
    pass


class GridMismatch(ErnstLaxError, ValueError):
    pass


class PathOffGrid(ErnstLaxError, IndexError):
    pass


class EmptyInterior(ErnstLaxError, ValueError):
    pass


class DegreeError(ErnstLaxError, TypeError):
    pass


class NonPositiveF(ErnstLaxError, ValueError):
    pass


class BadParametrization(ErnstLaxError, ValueError):
    pass


class UnknownSolution(ErnstLaxError, KeyError):
    pass


class BadParameters(ErnstLaxError, ValueError):
    pass


class SingularityOnGrid(ErnstLaxError, ValueError):
    pass


class SingularMatrix(ErnstLaxError, ArithmeticError):
    """Raised when a per-node 2x2 matrix is not safely invertible."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class UnknownCharacteristic(ErnstLaxError, KeyError):
    pass


class BackgroundMismatch(ErnstLaxError, ValueError):
    pass


class NotClosed(ErnstLaxError, ArithmeticError):
    pass


class Inconsistent(ErnstLaxError, ArithmeticError):
    pass


class ZeroLambda(ErnstLaxError, ZeroDivisionError):
    pass


class TooFewNodes(ErnstLaxError, ValueError):
    pass


class ConfigError(ErnstLaxError, ValueError):
    """Bad run configuration; ``key`` names the offending entry."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
