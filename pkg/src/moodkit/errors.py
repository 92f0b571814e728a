"""Exception types shared across the toolkit."""


class MoodkitError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(MoodkitError):
    """A config value is outside its documented domain."""


class AnnotationParseError(MoodkitError):
    """A malformed annotation row; carries the 1-based line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class RejectedTrackError(MoodkitError):
    """A track with no usable frame records after filtering."""


class MissingEmotionError(MoodkitError):
    """A categorical emotion is absent where one is required; the caller
    should exclude the sample rather than fabricate a label."""


class DegenerateDatasetError(MoodkitError):
    """A training set that cannot support the requested loss
    (e.g. a single-class pair set under the contrastive term)."""


class UpstreamArtifactError(MoodkitError):
    """An upstream artifact is stale (config hash mismatch) or was
    modified after it was written (content hash mismatch)."""
