"""Exception taxonomy shared across the package.

ValidationError and its subclasses signal bad data or configuration
(CLI exit code 2); every other ClinTriageError is a runtime failure
(exit code 3).
"""


class ClinTriageError(Exception):
    """Base class for all package errors."""


class ValidationError(ClinTriageError):
    """Input data, schema, or configuration is invalid."""


class SchemaError(ValidationError):
    """A required column or field is missing or malformed."""


class DatasetError(ValidationError):
    """Dataset content violates the loader contract."""


class StratificationError(ValidationError):
    """A class is too small to split or oversample."""


class ConfigError(ValidationError):
    """System configuration file is invalid or incomplete."""


class CheckpointError(ValidationError):
    """Model checkpoint file is corrupt or incompatible."""


class EmbeddingFileError(ValidationError):
    """Embedding file header or rows are malformed."""


class TrainingDivergedError(ClinTriageError):
    """Training produced a non-finite loss."""


class GenerationUnavailableError(ClinTriageError):
    """External generator endpoint failed or timed out."""


class QueueError(ClinTriageError):
    """Review-queue operation rejected (unknown or already-resolved item)."""
