"""Backend configuration records."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Literal, Mapping

from ..errors import ConfigError
from ..knowledge import parse_token_count

BackendKind = Literal["http", "oracle"]

# 128k chunks plus prompt scaffolding and a few messages must fit strictly below it
DEFAULT_MAX_CONTEXT = 132 * 1024
API_KEY_ENV = "EXTAGENTS_API_KEY"


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    backoff_initial: float = 1.0
    backoff_factor: float = 2.0

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ConfigError("retry.max_attempts must be >= 1", field="retry.max_attempts")
        if self.backoff_initial < 0 or self.backoff_factor < 1:
            raise ConfigError("retry backoff must be non-negative and non-shrinking", field="retry")

    def delay(self, attempt: int) -> float:
        """Sleep before retry number ``attempt`` (1-based)."""
        return self.backoff_initial * self.backoff_factor ** (attempt - 1)


@dataclass(frozen=True)
class BackendConfig:
    kind: BackendKind = "oracle"
    model_name: str = "oracle"
    endpoint: str | None = None
    temperature: float = 0.0
    max_context: int = DEFAULT_MAX_CONTEXT
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    timeout: float = 120.0
    max_concurrency: int = 8
    # oracle-only knobs
    message_budget: int = 256
    latency_base: float = 0.5
    latency_per_token: float = 2e-5

    def __post_init__(self) -> None:
        if self.kind not in ("http", "oracle"):
            raise ConfigError(f"unknown backend kind {self.kind!r}", field="kind")
        if self.kind == "http" and not self.endpoint:
            raise ConfigError("http backend needs an endpoint", field="endpoint")
        if self.max_context <= 0:
            raise ConfigError("max_context must be > 0", field="max_context")
        if not math.isfinite(self.temperature) or self.temperature < 0:
            raise ConfigError("temperature must be finite and >= 0", field="temperature")
        if self.max_concurrency < 1:
            raise ConfigError("max_concurrency must be >= 1", field="max_concurrency")
        if self.message_budget < 1:
            raise ConfigError("message_budget must be >= 1", field="message_budget")

    def to_record(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> BackendConfig:
        values = dict(data)
        unknown = set(values) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown backend field(s): {', '.join(sorted(unknown))}",
                              field=sorted(unknown)[0])
        if "retry" in values and isinstance(values["retry"], Mapping):
            values["retry"] = RetryPolicy(**values["retry"])
        for key in ("max_context", "message_budget"):
            if key in values:
                values[key] = parse_token_count(values[key])
        return cls(**values)


@dataclass(frozen=True)
class RoleBackends:
    """Per-role backend choice; rating falls back to the seeking backend."""

    seeking: BackendConfig = field(default_factory=BackendConfig)
    reasoning: BackendConfig = field(default_factory=BackendConfig)
    rating: BackendConfig | None = None

    @property
    def rater(self) -> BackendConfig:
        return self.rating or self.seeking

    def with_all(self, **changes: Any) -> RoleBackends:
        return RoleBackends(replace(self.seeking, **changes), replace(self.reasoning, **changes),
                            replace(self.rating, **changes) if self.rating else None)

    def to_record(self) -> dict[str, Any]:
        return {"seeking": self.seeking.to_record(), "reasoning": self.reasoning.to_record(),
                "rating": self.rating.to_record() if self.rating else None}
