"""Exception types shared across the library."""


class VolsampleError(Exception):
    """Base class for all library errors."""


class IndexOutOfRangeError(VolsampleError):
    """A column index lies outside the valid range of the matrix."""


class DimensionMismatchError(VolsampleError):
    """Operands have incompatible shapes (e.g. label vector vs. column count)."""


class RankDeficientError(VolsampleError):
    """The design matrix does not have full row rank."""


class SingularMatrixError(VolsampleError):
    """A matrix required to be positive definite is (numerically) singular."""


class DenominatorVanishesError(VolsampleError):
    """A rank-one inverse update hit a vanishing denominator."""


class NumericBreakdownError(VolsampleError):
    """All elimination weights collapsed to zero; signals conditioning failure."""


class TooManySubsetsError(VolsampleError):
    """An exhaustive enumeration would exceed the configured cap."""


class SizeRangeError(VolsampleError):
    """A requested sample size falls outside the valid range [d, n]."""


class MatrixParseError(VolsampleError):
    """A matrix or label file could not be parsed.

    Carries the file path plus 1-based line and column of the offending field.
    """

    def __init__(self, path, line, column, message):
        self.path = str(path)
        self.line = line
        self.column = column
        super().__init__(f"{path}:{line}:{column}: {message}")
