"""Exception hierarchy shared across the package.

CLI exit codes: usage errors exit 1, ``RweError`` subclasses exit 2,
except ``DivergenceError`` which exits 3.
"""


class RweError(Exception):
    """Base class for all package errors."""


class CorpusDecodeError(RweError):
    def __init__(self, byte_offset, message="invalid UTF-8"):
        self.byte_offset = byte_offset
        super().__init__(f"{message} at byte offset {byte_offset}")


class EmptyVocabularyError(RweError):
    pass


class MissingPairError(RweError):
    pass


class EmbeddingParseError(RweError):
    def __init__(self, line_number, message):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class WordLookupError(RweError):
    pass


class DimensionMismatchError(RweError):
    pass


class ZeroNormError(RweError):
    pass


class NoEvidenceError(RweError):
    """Relation-vector bag empty after filtering."""


class DivergenceError(RweError):
    def __init__(self, epoch, message="non-finite loss"):
        self.epoch = epoch
        super().__init__(f"{message} at epoch {epoch}")


class DegenerateTrainingError(RweError):
    pass


class UndefinedCorrelationError(RweError):
    pass


class PipelineError(RweError):
    pass
