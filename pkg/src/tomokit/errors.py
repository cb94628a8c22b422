"""Exception hierarchy.

Numeric failures derive from :class:`NumericError`, file-format problems from
:class:`FormatError`. The CLI maps the two families onto exit codes 2 and 3.
"""


class TomokitError(Exception):
    """Base class for all package errors."""


class NumericError(TomokitError, ValueError):
    """A computation was asked for outside its valid regime."""


class InvalidDimensionError(NumericError):
    pass


class DimensionMismatchError(NumericError):
    pass


class InvalidStateError(NumericError):
    """Matrix fails a density-matrix invariant (Hermiticity, trace, PSD)."""


class NotPSDError(InvalidStateError):
    pass


class DegenerateDirectionError(NumericError):
    """Quadrature direction with mu = nu = 0."""


class InsufficientCutoffError(NumericError):
    pass


class CutoffOverflowError(NumericError):
    pass


class GridTooNarrowError(NumericError):
    pass


class GridTooCoarseError(NumericError):
    pass


class InsufficientCoverageError(NumericError):
    pass


class UnboundedKernelError(NumericError):
    pass


class NoRealSolutionError(NumericError):
    pass


class EmptyDistributionError(NumericError):
    pass


class FormatError(TomokitError):
    """Malformed or inconsistent file content."""


class MalformedHeaderError(FormatError):
    pass


class VersionMismatchError(FormatError):
    pass


class NaNPayloadError(FormatError):
    pass


class MissingFileError(FormatError, FileNotFoundError):
    pass


class ParseError(FormatError):
    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class PayloadShapeError(FormatError):
    """Array lengths disagree with the declared shape."""
