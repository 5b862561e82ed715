from .base import NO_ANSWER, NO_INFORMATION, Backend, Backends, Completion, complete, is_sentinel, make_backend
from .config import API_KEY_ENV, DEFAULT_MAX_CONTEXT, BackendConfig, RetryPolicy, RoleBackends
from .cost import GPT4O_MINI, CompletionUsage, CostModel, estimate_cost, exact_cost
from .oracle import GUESS_MARKER, Fact, OracleBackend, OracleWorld
from .templates import PromptTemplate, TemplateSet, load_templates, render

__all__ = [
    "API_KEY_ENV",
    "DEFAULT_MAX_CONTEXT",
    "GPT4O_MINI",
    "GUESS_MARKER",
    "NO_ANSWER",
    "NO_INFORMATION",
    "Backend",
    "BackendConfig",
    "Backends",
    "Completion",
    "CompletionUsage",
    "CostModel",
    "Fact",
    "OracleBackend",
    "OracleWorld",
    "PromptTemplate",
    "RetryPolicy",
    "RoleBackends",
    "TemplateSet",
    "complete",
    "estimate_cost",
    "exact_cost",
    "is_sentinel",
    "load_templates",
    "make_backend",
    "render",
]
