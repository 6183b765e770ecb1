"""Exception types shared across the pipeline."""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class MalformedScore(PipelineError):
    """Model reply did not contain a bracketed score from the allowed set."""


class EmptyCaption(PipelineError):
    """Model returned a blank caption or description."""


class EmptyText(PipelineError):
    """Text metric received an input that tokenizes to nothing."""


class TransportError(PipelineError):
    """Network-level failure that persisted through all retries."""


class BackendError(PipelineError):
    """Backend rejected the request with a non-retryable error."""


class AuthError(BackendError):
    """Backend rejected the configured credentials."""


class NoScriptedReply(BackendError):
    """Mock backend had no script entry matching the request."""


class ManifestError(PipelineError):
    """Video manifest is malformed or inconsistent with the filesystem."""


class AnnotationError(PipelineError):
    """Annotation file contains a malformed row."""


class DegenerateLabels(PipelineError):
    """Ranking metric requires both classes to be present."""


class NoAnnotatedFrames(PipelineError):
    """Localization metric requires at least one annotated frame."""


class ConfigError(PipelineError):
    """Run configuration is invalid or stages were requested out of order."""
