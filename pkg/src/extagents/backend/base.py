"""The agent-call abstraction shared by the HTTP and oracle backends."""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import TYPE_CHECKING, Protocol

from ..errors import BudgetError, ConfigError
from ..knowledge import DEFAULT_COUNTER, TokenCounter
from .config import BackendConfig, RoleBackends
from .cost import CompletionUsage
from .templates import TemplateSet

if TYPE_CHECKING:
    from .oracle import OracleWorld

NO_INFORMATION = "NO INFORMATION"
NO_ANSWER = "NO ANSWER"

_PUNCT = set(string.punctuation) | set("，。！？；：、“”‘’（）《》【】…—·「」")


@dataclass(frozen=True)
class Completion:
    text: str
    usage: CompletionUsage
    latency: float


class Backend(Protocol):
    config: BackendConfig
    counter: TokenCounter

    def complete(self, prompt: str) -> Completion: ...


def check_budget(config: BackendConfig, counter: TokenCounter, prompt: str) -> int:
    """Raise before any I/O when ``prompt`` does not fit strictly under the window."""
    tokens = counter.count(prompt)
    if tokens >= config.max_context:
        raise BudgetError(
            f"prompt has {tokens} tokens; {config.model_name} accepts fewer than {config.max_context}",
            tokens=tokens, limit=config.max_context)
    return tokens


def is_sentinel(reply: str, sentinel: str) -> bool:
    """True when the reply is the sentinel alone, ignoring case, spacing and punctuation."""
    stripped = "".join(ch for ch in reply if ch not in _PUNCT)
    return " ".join(stripped.split()).upper() == sentinel


def make_backend(config: BackendConfig, *, counter: TokenCounter = DEFAULT_COUNTER,
                 world: OracleWorld | None = None, templates: TemplateSet | None = None) -> Backend:
    if config.kind == "oracle":
        from .oracle import OracleBackend

        if world is None:
            raise ConfigError("oracle backend needs a scripted world", field="kind")
        return OracleBackend(config, world, counter=counter,
                             templates=list(templates) if templates is not None else None)
    from .http import HttpBackend

    return HttpBackend(config, counter=counter)


def complete(config: BackendConfig, prompt: str, *, counter: TokenCounter = DEFAULT_COUNTER,
             world: OracleWorld | None = None) -> Completion:
    return make_backend(config, counter=counter, world=world).complete(prompt)


@dataclass
class Backends:
    """Live backends for each agent role, plus the prompts and counter they share."""

    seeking: Backend
    reasoning: Backend
    rating: Backend
    templates: TemplateSet
    counter: TokenCounter = DEFAULT_COUNTER

    @classmethod
    def build(cls, roles: RoleBackends, templates: TemplateSet, *,
              counter: TokenCounter = DEFAULT_COUNTER, world: OracleWorld | None = None) -> Backends:
        built: list[Backend] = []

        def get(cfg: BackendConfig) -> Backend:
            # identical configs share one instance (one connection pool per endpoint)
            for backend in built:
                if backend.config == cfg:
                    return backend
            built.append(make_backend(cfg, counter=counter, world=world, templates=templates))
            return built[-1]

        return cls(get(roles.seeking), get(roles.reasoning), get(roles.rater), templates, counter)
