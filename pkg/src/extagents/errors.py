"""Exception hierarchy shared across the engine."""

from __future__ import annotations

from typing import Any


class ExtAgentsError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(ExtAgentsError):
    """Invalid or inconsistent configuration."""

    def __init__(self, message: str, *, field: str | None = None) -> None:
        super().__init__(message)
        self.field = field


class BudgetError(ExtAgentsError):
    """A prompt or chunk does not fit the context window it targets."""

    def __init__(self, message: str, *, tokens: int | None = None, limit: int | None = None,
                 chunk_index: int | None = None) -> None:
        super().__init__(message)
        self.tokens = tokens
        self.limit = limit
        self.chunk_index = chunk_index


class TemplateError(ExtAgentsError):
    """A prompt template could not be rendered."""

    def __init__(self, message: str, *, placeholder: str | None = None) -> None:
        super().__init__(message)
        self.placeholder = placeholder


class TransportError(ExtAgentsError):
    """The chat-completion endpoint could not be reached or kept failing."""

    def __init__(self, message: str, *, status: int | None = None, attempts: int = 0) -> None:
        super().__init__(message)
        self.status = status
        self.attempts = attempts


class ProtocolError(ExtAgentsError):
    """A backend reply did not have the expected shape."""


class ScoringError(ExtAgentsError):
    """A relevance rating reply carried no parsable score."""


class TraceError(ExtAgentsError):
    """A run trace is malformed (unknown ids, cycles, wrong schema)."""


class AgentCallError(ExtAgentsError):
    """A backend call failed on behalf of one agent."""

    def __init__(self, message: str, *, agent_index: int | None, cause: BaseException) -> None:
        super().__init__(message)
        self.agent_index = agent_index
        self.cause = cause


class RunAborted(ExtAgentsError):
    """A run stopped early; ``partial_trace`` holds the events recorded so far."""

    def __init__(self, message: str, *, partial_trace: list[Any], cause: BaseException) -> None:
        super().__init__(message)
        self.partial_trace = partial_trace
        self.cause = cause
