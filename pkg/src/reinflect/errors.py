"""Exception hierarchy shared by all reinflect modules."""


class ReinflectError(Exception):
    """Base class for all package errors."""


class DimensionError(ReinflectError):
    """Operand shapes are incompatible for the requested operation."""


class VocabularyError(ReinflectError):
    """A symbol id is outside the valid vocabulary range."""


class InputError(ReinflectError):
    """An operation received structurally invalid input (e.g. empty sequence)."""


class DataError(ReinflectError):
    """Dataset content violates the expected format or alphabet."""


class ParseError(DataError):
    """A data file line could not be parsed; message carries the line number."""


class ConfigError(ReinflectError):
    """An invalid run or training configuration."""


class TrainingDivergedError(ReinflectError):
    """Training produced a non-finite loss."""


class ModelLoadError(ReinflectError):
    """Base class for model-file deserialization failures."""


class ModelVersionError(ModelLoadError):
    """Bad magic bytes or unsupported format version."""


class ModelTruncatedError(ModelLoadError):
    """The model file ended before all declared payload was read."""


class ModelChecksumError(ModelLoadError):
    """The stored checksum does not match the file contents."""
