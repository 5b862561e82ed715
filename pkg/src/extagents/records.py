"""Versioned result and trace files, and offline replay of traces."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from .backend.cost import GPT4O_MINI, CostModel
from .errors import ConfigError
from .reason import ReasoningOutcome
from .runtime import RunResult
from .trace import TraceEvent, TraceTotals, bandwidth, compute_totals

RESULT_SCHEMA = "extagents.result/v1"
TRACE_SCHEMA = "extagents.trace/v1"
REPLAY_SCHEMA = "extagents.replay/v1"


def trace_record(result: RunResult, sample_id: str | None = None) -> dict[str, Any]:
    """A self-contained trace file: the run's identity plus every event."""
    return {
        "schema": TRACE_SCHEMA,
        "sample_id": sample_id,
        "method": result.method,
        "answer": result.answer,
        "outcome": result.outcome.to_record(),
        "n_chunks": result.n_chunks,
        "events": [e.to_record() for e in result.trace],
    }


def result_record(result: RunResult, sample_id: str, cost_model: CostModel, *,
                  include_trace: bool = True) -> dict[str, Any]:
    record: dict[str, Any] = {
        "schema": RESULT_SCHEMA,
        "sample_id": sample_id,
        "method": result.method,
        "answer": result.answer,
        "outcome": result.outcome.to_record(),
        "n_chunks": result.n_chunks,
        "totals": result.totals.to_record(),
        "bandwidth": bandwidth(result.trace),
        "cost_model": cost_model.to_record(),
    }
    if include_trace:
        record["trace"] = trace_record(result, sample_id)
    return record


def _trace_of(record: Mapping[str, Any]) -> Mapping[str, Any]:
    schema = record.get("schema")
    if schema == RESULT_SCHEMA:
        if "trace" not in record:
            raise ConfigError("result record carries no trace; rerun with traces enabled", field="trace")
        return _trace_of(record["trace"])
    if schema != TRACE_SCHEMA:
        raise ConfigError(f"unsupported trace schema {schema!r}; expected {TRACE_SCHEMA}", field="schema")
    return record


@dataclass(frozen=True)
class ReplayResult:
    sample_id: str | None
    method: str | None
    answer: str | None
    outcome: ReasoningOutcome | None
    events: tuple[TraceEvent, ...]
    totals: TraceTotals
    bandwidth: int
    cost_model: CostModel

    def to_record(self) -> dict[str, Any]:
        return {
            "schema": REPLAY_SCHEMA,
            "sample_id": self.sample_id,
            "method": self.method,
            "answer": self.answer,
            "outcome": self.outcome.to_record() if self.outcome else None,
            "totals": self.totals.to_record(),
            "bandwidth": self.bandwidth,
            "cost_model": self.cost_model.to_record(),
        }


def replay(record: Mapping[str, Any], cost_model: CostModel = GPT4O_MINI) -> ReplayResult:
    """Recompute totals, cost and critical path from a stored trace, without any calls."""
    trace = _trace_of(record)
    try:
        events = tuple(TraceEvent.from_record(e) for e in trace.get("events", ()))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed trace event: {exc}", field="events") from exc
    outcome = ReasoningOutcome.from_record(trace["outcome"]) if trace.get("outcome") else None
    return ReplayResult(trace.get("sample_id"), trace.get("method"), trace.get("answer"), outcome, events,
                        compute_totals(events, cost_model), bandwidth(events), cost_model)
