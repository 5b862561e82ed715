"""Pieces shared by every orchestration: backends, chunking, results."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Iterator, Mapping

from .backend.base import Backends
from .backend.oracle import OracleWorld
from .backend.templates import load_templates
from .config import RunConfig
from .errors import ExtAgentsError, RunAborted
from .knowledge import KnowledgeChunk, KnowledgeSource, partition, truncate_to_budget
from .reason import ReasoningOutcome
from .trace import TraceEvent, TraceRecorder, TraceTotals, compute_totals


def build_backends(cfg: RunConfig, world: OracleWorld | None = None) -> Backends:
    templates = load_templates(cfg.task, cfg.language, cfg.templates_dir)
    return Backends.build(cfg.role_backends, templates, counter=cfg.counter, world=world)


def prepare_chunks(source: KnowledgeSource, cfg: RunConfig) -> list[KnowledgeChunk]:
    counter = cfg.counter
    truncated = truncate_to_budget(source, cfg.input_budget, counter)
    return partition(truncated, cfg.chunk_size, counter,
                     context_limit=cfg.role_backends.seeking.max_context)


@contextmanager
def worker_pool(cfg: RunConfig) -> Iterator[ThreadPoolExecutor]:
    with ThreadPoolExecutor(max_workers=cfg.workers, thread_name_prefix="agent") as pool:
        yield pool


@contextmanager
def aborting(recorder: TraceRecorder, method: str) -> Iterator[None]:
    """Turn any failure during a run into :class:`RunAborted` carrying the partial trace."""
    try:
        yield
    except RunAborted:
        raise
    except ExtAgentsError as exc:
        raise RunAborted(f"{method} run aborted: {exc}", partial_trace=list(recorder.events),
                         cause=exc) from exc


@dataclass(frozen=True)
class RunResult:
    method: str
    answer: str
    outcome: ReasoningOutcome
    trace: tuple[TraceEvent, ...]
    totals: TraceTotals
    n_chunks: int

    def to_record(self, *, include_trace: bool = True) -> dict[str, Any]:
        record: dict[str, Any] = {
            "method": self.method,
            "answer": self.answer,
            "outcome": self.outcome.to_record(),
            "n_chunks": self.n_chunks,
            "totals": self.totals.to_record(),
        }
        if include_trace:
            record["trace"] = [e.to_record() for e in self.trace]
        return record

    @classmethod
    def from_record(cls, record: Mapping[str, Any], cfg: RunConfig | None = None) -> RunResult:
        trace = tuple(TraceEvent.from_record(e) for e in record.get("trace", ()))
        cost_model = cfg.cost_model if cfg is not None else RunConfig().cost_model
        return cls(record["method"], record["answer"], ReasoningOutcome.from_record(record["outcome"]),
                   trace, compute_totals(trace, cost_model), int(record.get("n_chunks", 0)))


def finish(method: str, outcome: ReasoningOutcome, recorder: TraceRecorder, n_chunks: int,
           cfg: RunConfig) -> RunResult:
    events = recorder.events
    return RunResult(method, outcome.answer or "", outcome, events,
                     compute_totals(events, cfg.cost_model), n_chunks)
