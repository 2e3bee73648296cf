"""Exception hierarchy shared by all modules."""


class PrimsetError(Exception):
    """Base class for every error raised by this package."""


class InvalidWord(PrimsetError, IndexError):
    pass


class DimensionMismatch(PrimsetError, ValueError):
    pass


class ParseError(PrimsetError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NotNZ(PrimsetError, ValueError):
    """A matrix has an all-zero row or column where an NZ matrix is required."""


class NotSynchronizing(PrimsetError, ValueError):
    pass


class SizeLimit(PrimsetError):
    """The requested computation exceeds a configured size cap."""


class TooManyLetters(SizeLimit):
    pass


class NotRowStochastic(PrimsetError, ValueError):
    pass


class OriginMismatch(PrimsetError, ValueError):
    pass


class BadDimension(PrimsetError, ValueError):
    pass


class NotDivisible(PrimsetError, ValueError):
    pass


class DoesNotConverge(PrimsetError):
    def __init__(self, j, attempts):
        self.j = j
        self.attempts = attempts
        super().__init__(f"does not converge: no compatible partition for j={j} after {attempts} attempts")


class ParityMismatch(PrimsetError, ValueError):
    pass


class BadIndices(PrimsetError, ValueError):
    pass


class BadParameter(PrimsetError, ValueError):
    pass


class NotSymmetric(PrimsetError, ValueError):
    pass


class NotIrreducible(PrimsetError, ValueError):
    pass


class ConfigError(PrimsetError, ValueError):
    pass
