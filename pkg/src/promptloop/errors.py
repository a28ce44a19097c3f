"""Exception hierarchy shared by the engine, the CLI, and the HTTP API.

Every error carries a ``code`` from a closed set so the API layer can map
exceptions to HTTP statuses without inspecting messages.
"""

from __future__ import annotations

from typing import Any


class PromptLoopError(Exception):
    """Base class for all engine errors."""

    code = "validation"

    def __init__(self, message: str, detail: Any = None):
        super().__init__(message)
        self.message = message
        self.detail = detail


class ValidationError(PromptLoopError):
    """Bad input: malformed data, violated preconditions, unknown ids."""

    code = "validation"


class StateError(PromptLoopError):
    """Operation not allowed in the session's current phase."""

    code = "state"


class PoolExhaustedError(StateError):
    """Not enough unannotated pairs left to fill a batch."""

    code = "state"


class TransportError(PromptLoopError):
    """Network failure talking to an LLM backend, after retries."""

    code = "transport"


class ProtocolError(TransportError):
    """The LLM endpoint answered with a non-success status or bad payload."""

    def __init__(self, message: str, status: int | None = None, body: str | None = None):
        super().__init__(message, detail={"status": status, "body": body})
        self.status = status
        self.body = body


class NotFoundError(PromptLoopError):
    """Referenced session or resource does not exist."""

    code = "not_found"


class ConfigError(PromptLoopError):
    """Missing or inconsistent configuration (credentials, paths, fields)."""

    code = "config"


class TemplateError(ValidationError):
    """A prompt template is missing a required placeholder."""


class SessionLoadError(ConfigError):
    """A persisted session file is unreadable, truncated, or incompatible."""
