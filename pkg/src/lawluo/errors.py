"""Exception and warning types shared across the package."""


class LawluoError(Exception):
    """Base class for all engine errors."""


class ConfigError(LawluoError):
    """Invalid session or deployment configuration."""


class PhaseError(LawluoError):
    """An event was applied in a phase where it is not legal."""

    def __init__(self, phase, event_type):
        super().__init__(f"event {event_type!r} is not legal in phase {phase!r}")
        self.phase = phase
        self.event_type = event_type


class UsageError(LawluoError):
    """Caller violated an operation precondition."""


class ShapeError(LawluoError):
    """Vector or matrix dimensions do not match."""


class BackendUnavailable(LawluoError):
    """Transport-level backend failure; retryable."""


class ProtocolError(LawluoError):
    """Provider replied with something outside the documented schema."""


class GenerationError(LawluoError):
    """Backend output could not be parsed after retries."""

    def __init__(self, message, raw_text=""):
        super().__init__(message)
        self.raw_text = raw_text


class MissingClassError(LawluoError):
    """A configured domain has no training questions."""


class ReportFormatError(LawluoError):
    """Report generation could not produce all required sections."""

    def __init__(self, missing_sections):
        super().__init__(f"missing report sections: {', '.join(missing_sections)}")
        self.missing_sections = list(missing_sections)


class JudgeError(LawluoError):
    """Judge backend verdict unparsable after retries."""


class IoError(LawluoError):
    """File could not be read."""


class ParseError(LawluoError):
    """A corpus line failed to parse."""

    def __init__(self, message, line_number=None):
        super().__init__(message)
        self.line_number = line_number


class NotFound(LawluoError):
    """Unknown session id."""


class TruncationWarning(UserWarning):
    """An over-length text was truncated before embedding."""


class ClampWarning(UserWarning):
    """Requested k exceeded index size; result clamped."""
