"""Exception and warning types raised across the package."""


class RamanWTError(Exception):
    """Base class for all package errors."""


class DataError(RamanWTError, ValueError):
    """Input data violates a documented precondition."""


class MalformedLine(DataError):
    def __init__(self, line_no, line=""):
        self.line_no = line_no
        super().__init__(f"malformed data on line {line_no}: {line!r}")


class TooShort(DataError):
    pass


class NonFinite(DataError):
    pass


class InvalidPeak(DataError):
    pass


class SchemaError(DataError):
    def __init__(self, entry, message):
        self.entry = entry
        super().__init__(f"manifest entry {entry}: {message}")


class ZeroSignal(DataError):
    pass


class EmptyClass(DataError):
    pass


class ScaleTooLarge(DataError):
    pass


class LabelOutOfRange(DataError):
    pass


class EmptyInput(DataError):
    pass


class EmptyTrainingSet(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class BatchTooSmall(DataError):
    pass


class Diverged(RamanWTError):
    """Training produced a non-finite loss.

    ``checkpoint`` holds the last model whose loss was finite (or ``None``
    if divergence happened on the first batch).
    """

    def __init__(self, message, checkpoint=None, history=None):
        super().__init__(message)
        self.checkpoint = checkpoint
        self.history = history


class DegenerateRangeWarning(UserWarning):
    pass


class DuplicateWavenumberWarning(UserWarning):
    pass


class ConvergenceWarning(UserWarning):
    pass
