"""Exception types raised across the package."""


class ExactSpmvError(Exception):
    """Base class for every error raised by exactspmv."""


class ModulusTooLarge(ExactSpmvError, ValueError):
    """The accumulator cannot hold even one product (or sum) exactly."""


class BadModulus(ExactSpmvError, ValueError):
    pass


class IndexOutOfBounds(ExactSpmvError, IndexError):
    pass


class DimensionMismatch(ExactSpmvError, ValueError):
    pass


class WidthTooSmall(ExactSpmvError, ValueError):
    pass


class UnsupportedBlockWidth(ExactSpmvError, ValueError):
    pass


class NonSquare(ExactSpmvError, ValueError):
    pass


class OrderTooSmall(ExactSpmvError, ValueError):
    pass


class DuplicatePoints(ExactSpmvError, ValueError):
    pass


class CountMismatch(ExactSpmvError, ValueError):
    pass


class GeneratorNotFound(ExactSpmvError, ArithmeticError):
    """The extracted matrix generator failed validation; re-randomize and retry."""


class ModulusTooSmallForInterpolation(ExactSpmvError, ValueError):
    pass


class ZeroDeterminant(ExactSpmvError, ArithmeticError):
    pass


class RetriesExhausted(ExactSpmvError, RuntimeError):
    pass


class ParseError(ExactSpmvError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MissingTerminator(ParseError):
    pass


class UnsupportedVariant(ParseError):
    pass
