"""Scaling external knowledge input beyond one context window with cooperating agents."""

from .config import BaselineConfig, RunConfig, load_run_config
from .errors import (
    AgentCallError,
    BudgetError,
    ConfigError,
    ExtAgentsError,
    ProtocolError,
    RunAborted,
    ScoringError,
    TemplateError,
    TraceError,
    TransportError,
)
from .knowledge import KnowledgeChunk, KnowledgeSource, TokenCounter, count_tokens, partition, truncate_to_budget
from .orchestrator import run, run_extagents, run_interleaved
from .runtime import RunResult

__version__ = "0.1.0"

__all__ = [
    "AgentCallError",
    "BaselineConfig",
    "BudgetError",
    "ConfigError",
    "ExtAgentsError",
    "KnowledgeChunk",
    "KnowledgeSource",
    "ProtocolError",
    "RunAborted",
    "RunConfig",
    "RunResult",
    "ScoringError",
    "TemplateError",
    "TokenCounter",
    "TraceError",
    "TransportError",
    "count_tokens",
    "load_run_config",
    "partition",
    "run",
    "run_extagents",
    "run_interleaved",
    "truncate_to_budget",
]
