"""Exception types raised across the recognition toolkit."""


class BlprError(Exception):
    """Base class for every domain error the toolkit raises."""


class UnsupportedFormatError(BlprError, ValueError):
    pass


class CorruptDataError(BlprError, ValueError):
    pass


class ImageIOError(BlprError, OSError):
    pass


class ZeroDimensionError(BlprError, ValueError):
    pass


class DimensionMismatchError(BlprError, ValueError):
    pass


class ConstantImageError(BlprError, ValueError):
    pass


class InvalidPercentilesError(BlprError, ValueError):
    pass


class ProcessFailedError(BlprError):
    def __init__(self, returncode: int, stderr: str = ""):
        self.returncode = returncode
        self.stderr = stderr
        msg = f"external enhancer exited with code {returncode}"
        if stderr:
            msg += f": {stderr.strip()}"
        super().__init__(msg)


class OutputMissingError(BlprError):
    pass


class EnhanceTimeoutError(BlprError, TimeoutError):
    pass


class EmptyInputError(BlprError, ValueError):
    pass


class BoxOutOfBoundsError(BlprError, ValueError):
    pass


class ShapeMismatchError(BlprError, ValueError):
    pass


class LabelOutOfRangeError(BlprError, ValueError):
    pass


class EmptyDatasetError(BlprError, ValueError):
    pass


class ModelFormatError(BlprError, ValueError):
    """Model file could not be decoded."""


class BadMagicError(ModelFormatError):
    pass


class VersionMismatchError(ModelFormatError):
    pass


class ChecksumMismatchError(ModelFormatError):
    pass


class MissingSplitError(BlprError, FileNotFoundError):
    pass


class UnknownClassDirError(BlprError, ValueError):
    pass


class UnreadableImageError(BlprError, ValueError):
    pass


class ClassOutOfRangeError(BlprError, ValueError):
    pass


class EmptyMatrixError(BlprError, ValueError):
    pass


class ModelVocabMismatchError(BlprError, ValueError):
    pass


class PipelineError(BlprError):
    """A stage of plate recognition failed; ``stage`` names it."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")


class NoGlyphsFoundError(PipelineError):
    def __init__(self, message: str, stage: str = "filter"):
        self.stage = stage
        self.cause = None
        BlprError.__init__(self, f"{stage}: {message}")
