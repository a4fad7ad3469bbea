"""Exception hierarchy shared by every qpcaclf module."""


class QpcaError(Exception):
    """Base class for all errors raised by qpcaclf."""


class DimensionError(QpcaError, ValueError):
    """Operand dimensions or shapes do not agree."""


class NormalizationError(QpcaError, ValueError):
    """A state expected to have unit norm does not."""


class ZeroProbabilityError(QpcaError, ValueError):
    """Collapse was requested onto an outcome of probability zero."""


class RangeError(QpcaError, ValueError):
    """A value lies outside the interval an encoder accepts."""


class DegenerateSampleError(QpcaError, ValueError):
    """A training sample cannot be normalized (zero vector)."""


class NumericalError(QpcaError, ArithmeticError):
    """Non-finite input or a decomposition that failed to converge."""


class RankError(QpcaError, ValueError):
    """More principal components were requested than the data supports."""


class ModelIntegrityError(QpcaError, ValueError):
    """Model components are not orthonormal or fields are inconsistent."""


class ParseError(QpcaError, ValueError):
    """Malformed image or model payload.

    ``offset`` is the byte offset of the problem when it is known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class FormatError(QpcaError, ValueError):
    """Input is in a format that is recognised but not supported."""


class VersionError(QpcaError, ValueError):
    """Model file declares a format version this release cannot read."""


class UsageError(QpcaError, ValueError):
    """Invalid combination of command-line arguments or empty batch."""
