"""Exception hierarchy shared by every module of the package."""


class ArrayCodeError(Exception):
    """Base class for all errors raised by ldmds."""


class FieldMismatch(ArrayCodeError, ValueError):
    """Operands belong to different prime fields."""


class DivisionByZero(ArrayCodeError, ZeroDivisionError):
    pass


class DimensionMismatch(ArrayCodeError, ValueError):
    pass


class SingularMatrix(ArrayCodeError, ArithmeticError):
    """Raised when inverting a matrix that has no inverse over GF(q)."""


class InvalidParams(ArrayCodeError, ValueError):
    pass


class FieldTooSmall(ArrayCodeError, ValueError):
    pass


class DecodeError(ArrayCodeError):
    """Base class for erasure recovery failures."""


class TooManyErasures(DecodeError):
    pass


class Unrecoverable(DecodeError):
    """The erasure submatrix is singular, so the input code is not MDS."""


class BudgetExceeded(ArrayCodeError, RuntimeError):
    pass


class NotApplicable(ArrayCodeError, ValueError):
    """Preconditions of a graph construction are not met."""


class TopologyViolation(ArrayCodeError, RuntimeError):
    """A symbol would travel between two nodes that share no link."""
