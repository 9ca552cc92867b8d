"""Exception types shared across the package."""


class VidfpError(Exception):
    """Base class for all package errors."""


class NotIsoBmff(VidfpError):
    """Input does not start with a recognizable ISO-BMFF top-level box."""


class NoAvcConfig(VidfpError):
    """Box tree contains no AVC decoder configuration record."""


class CorruptAvcConfig(VidfpError):
    """avcC record is internally inconsistent (length prefix overrun)."""


class BitstreamExhausted(VidfpError):
    """A bit read ran past the end of the RBSP data."""


class MissingParameter(VidfpError):
    """A core codec parameter was not decoded from the headers."""


class EmptyCorpus(VidfpError):
    """Vocabulary fitting requires at least one path list."""


class VocabularyKindMismatch(VidfpError):
    """Feature vectorizer was handed a vocabulary of the wrong kind."""


class NonNumericValue(VidfpError):
    """A field registered as non-categorical carried a non-numeric value."""


class EmptyTrainingSet(VidfpError):
    """Training requires at least one sample."""


class DimensionMismatch(VidfpError):
    """Feature vector length differs from the model's training dimension."""


class LengthMismatch(VidfpError):
    """Paired label sequences have different lengths."""


class InsufficientData(VidfpError):
    """Not enough samples for the requested cross-validation scheme."""


class ModelMismatch(VidfpError):
    """Loaded model is incompatible with the requested prediction setup."""


class ManifestError(VidfpError):
    """Manifest file is unreadable or malformed."""
