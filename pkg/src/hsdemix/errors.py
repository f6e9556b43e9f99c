"""Exception hierarchy shared by all hsdemix modules."""


class HsdemixError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(HsdemixError):
    """Operands have incompatible shapes."""


class NonFiniteError(HsdemixError):
    """A matrix constructor or file reader encountered NaN/Inf."""


class PreconditionError(HsdemixError):
    """An operation precondition was violated (bad tau, non-orthonormal basis, ...)."""


class SingularMatrixError(HsdemixError):
    """Pseudo-inverse of a rank-deficient matrix was requested."""

    def __init__(self, message, sigma_ratio=None):
        super().__init__(message)
        self.sigma_ratio = sigma_ratio


class NumericError(HsdemixError):
    """A numerical routine failed to converge."""


class DivergenceError(NumericError):
    """The solver produced a non-finite iterate."""

    def __init__(self, message, iteration):
        super().__init__(message)
        self.iteration = iteration


class DegenerateInputError(HsdemixError):
    """Input is degenerate for the requested operation (e.g. all-zero data)."""


class DataFormatError(HsdemixError):
    """Base class for binary file format errors."""


class MagicError(DataFormatError):
    """File does not start with the expected magic bytes."""


class TruncationError(DataFormatError):
    """File payload is shorter than the header promises."""

    def __init__(self, message, expected_bytes, actual_bytes):
        super().__init__(message)
        self.expected_bytes = expected_bytes
        self.actual_bytes = actual_bytes


class UndefinedRocError(HsdemixError):
    """ROC requested for labels containing a single class."""


class MissingClassError(HsdemixError):
    """Requested target class is absent from the label map."""
