"""Exception hierarchy shared across the runtime."""

from __future__ import annotations


class VoicePilotError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(VoicePilotError):
    """Configuration file missing, malformed, or inconsistent."""


class StreamClosed(VoicePilotError):
    """Input stream ended before the expected item arrived."""


class CaptureTimeout(VoicePilotError):
    """No usable speech/text arrived within the configured window."""


class BackendUnavailable(VoicePilotError):
    """A remote backend could not be reached."""


class UnrecognizedAudio(VoicePilotError):
    """Transcription backend produced an empty transcript."""


class EmptyCompletion(VoicePilotError):
    """Completion backend returned no text."""


class NoCode(VoicePilotError):
    """Completion text contained no extractable code."""


class ProgramParseError(VoicePilotError):
    """Candidate code contains a construct outside the command language.

    Carries the first offending line (1-based), the token that triggered the
    rejection, and a human-readable reason.
    """

    def __init__(self, line: int, token: str, reason: str):
        super().__init__(f"line {line}: {reason} (token: {token!r})")
        self.line = line
        self.token = token
        self.reason = reason


class ProgramValidationError(VoicePilotError):
    """A parsed statement violates a hard safety bound (not clippable)."""

    def __init__(self, stmt_index: int, reason: str):
        super().__init__(f"statement {stmt_index}: {reason}")
        self.stmt_index = stmt_index
        self.reason = reason


class AlreadyRunning(VoicePilotError):
    """A program is already executing on this robot."""


class NotRunning(VoicePilotError):
    """Interrupt requested but no program is active."""


class NotPaused(VoicePilotError):
    """Resume requested but execution is not paused."""


class BindError(VoicePilotError):
    """The wire service could not bind its port."""


class WireSchemaError(VoicePilotError):
    """Inbound wire message does not match the documented schema."""
