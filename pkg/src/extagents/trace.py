"""Run traces: one event per backend call, linked into a dependency DAG.

Every figure reported for a run (calls, tokens, cost, latency proxies) is a
fold over its trace, so a saved trace can be re-costed and re-analysed
without talking to any backend.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass, field, replace
from decimal import Decimal
from typing import Any, Iterable, Literal, Mapping, Sequence

from .backend.cost import GPT4O_MINI, CompletionUsage, CostModel, estimate_cost
from .errors import TraceError

EventKind = Literal["seek", "rate", "reason", "reduce", "baseline_step"]
EVENT_KINDS = ("seek", "rate", "reason", "reduce", "baseline_step")
# events whose output is a message other agents may read
MESSAGE_KINDS = frozenset({"seek", "reduce", "baseline_step"})


@dataclass(frozen=True)
class TraceEvent:
    id: int
    kind: EventKind
    depends_on: tuple[int, ...]
    agent_index: int | None
    timestep: int
    iteration: int
    usage: CompletionUsage
    wall_time: float
    status: str | None = None
    context: tuple[int, ...] = ()
    speculative: bool = False
    wasted: bool = False

    def to_record(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.kind,
            "depends_on": list(self.depends_on),
            "agent_index": self.agent_index,
            "timestep": self.timestep,
            "iteration": self.iteration,
            "input_tokens": self.usage.input_tokens,
            "output_tokens": self.usage.output_tokens,
            "wall_time": self.wall_time,
            "status": self.status,
            "context": list(self.context),
            "speculative": self.speculative,
            "wasted": self.wasted,
        }

    @classmethod
    def from_record(cls, record: Mapping[str, Any]) -> TraceEvent:
        try:
            kind = record["kind"]
            if kind not in EVENT_KINDS:
                raise TraceError(f"unknown event kind {kind!r}")
            return cls(
                id=int(record["id"]),
                kind=kind,
                depends_on=tuple(int(d) for d in record.get("depends_on", ())),
                agent_index=record.get("agent_index"),
                timestep=int(record.get("timestep", 0)),
                iteration=int(record.get("iteration", 0)),
                usage=CompletionUsage(int(record.get("input_tokens", 0)), int(record.get("output_tokens", 0))),
                wall_time=float(record.get("wall_time", 0.0)),
                status=record.get("status"),
                context=tuple(int(c) for c in record.get("context", ())),
                speculative=bool(record.get("speculative", False)),
                wasted=bool(record.get("wasted", False)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise TraceError(f"malformed trace event {record!r}: {exc}") from exc


class TraceRecorder:
    """Append-only event log; ids are handed out in append order."""

    def __init__(self) -> None:
        self._events: list[TraceEvent] = []
        self._lock = threading.Lock()

    def add(self, kind: EventKind, *, usage: CompletionUsage, wall_time: float,
            depends_on: Iterable[int] = (), agent_index: int | None = None, timestep: int = 0,
            iteration: int = 0, status: str | None = None, context: Iterable[int] = (),
            speculative: bool = False) -> TraceEvent:
        with self._lock:
            deps = tuple(sorted(set(depends_on)))
            event = TraceEvent(len(self._events), kind, deps, agent_index, timestep, iteration,
                               usage, wall_time, status, tuple(context), speculative)
            if deps and deps[-1] >= event.id:
                raise TraceError(f"event {event.id} depends on a later event {deps[-1]}")
            self._events.append(event)
            return event

    def mark_wasted(self, ids: Iterable[int]) -> None:
        wasted = set(ids)
        with self._lock:
            self._events = [
                replace(e, wasted=True) if e.id in wasted else e
                for e in self._events
            ]

    @property
    def events(self) -> tuple[TraceEvent, ...]:
        with self._lock:
            return tuple(self._events)

    def __len__(self) -> int:
        return len(self._events)


def _topological_order(events: Sequence[TraceEvent]) -> list[int]:
    """Kahn's algorithm over event positions; raises on unknown ids or cycles."""
    position = {e.id: i for i, e in enumerate(events)}
    if len(position) != len(events):
        raise TraceError("duplicate event ids in trace")
    indegree = [0] * len(events)
    children: list[list[int]] = [[] for _ in events]
    for i, event in enumerate(events):
        for dep in event.depends_on:
            if dep not in position:
                raise TraceError(f"event {event.id} depends on unknown event {dep}")
            children[position[dep]].append(i)
            indegree[i] += 1
    ready = deque(i for i, d in enumerate(indegree) if d == 0)
    order: list[int] = []
    while ready:
        i = ready.popleft()
        order.append(i)
        for child in children[i]:
            indegree[child] -= 1
            if indegree[child] == 0:
                ready.append(child)
    if len(order) != len(events):
        raise TraceError("trace dependencies contain a cycle")
    return order


def _longest_path(events: Sequence[TraceEvent], weight) -> float:
    if not events:
        return 0
    position = {e.id: i for i, e in enumerate(events)}
    finish = [0.0] * len(events)
    for i in _topological_order(events):
        event = events[i]
        start = max((finish[position[d]] for d in event.depends_on), default=0)
        finish[i] = start + weight(event)
    return max(finish)


def critical_path_rounds(events: Sequence[TraceEvent]) -> int:
    """Number of sequential backend calls on the longest dependency chain."""
    return int(_longest_path(events, lambda e: 1))


def modeled_latency(events: Sequence[TraceEvent]) -> float:
    """Wall time under unbounded parallelism: longest chain weighted by call latency."""
    return float(_longest_path(events, lambda e: e.wall_time))


def bandwidth(events: Sequence[TraceEvent]) -> int:
    """Most distinct agents whose output a single message-producing call could read.

    A call counts its own chunk's agent plus the producer of every message it
    depends on; a reduce output counts as one producer of its own.
    """
    by_id = {e.id: e for e in events}

    def producer(event: TraceEvent) -> tuple[str, int]:
        if event.kind == "reduce" or event.agent_index is None:
            return ("event", event.id)
        return ("agent", event.agent_index)

    best = 0
    for event in events:
        if event.kind not in MESSAGE_KINDS:
            continue
        keys = set()
        if event.kind != "reduce" and event.agent_index is not None:
            keys.add(("agent", event.agent_index))
        for dep in event.depends_on:
            parent = by_id.get(dep)
            if parent is None:
                raise TraceError(f"event {event.id} depends on unknown event {dep}")
            if parent.kind in MESSAGE_KINDS:
                keys.add(producer(parent))
        best = max(best, len(keys))
    return best


@dataclass(frozen=True)
class TraceTotals:
    calls: int
    input_tokens: int
    output_tokens: int
    cost: Decimal
    critical_path_rounds: int
    modeled_latency: float
    speculative_calls: int = 0
    speculative_input_tokens: int = 0
    speculative_output_tokens: int = 0
    wasted_calls: int = 0

    @property
    def usage(self) -> CompletionUsage:
        return CompletionUsage(self.input_tokens, self.output_tokens)

    def to_record(self) -> dict[str, Any]:
        return {
            "calls": self.calls,
            "input_tokens": self.input_tokens,
            "output_tokens": self.output_tokens,
            "cost": str(self.cost),
            "critical_path_rounds": self.critical_path_rounds,
            "modeled_latency": round(self.modeled_latency, 6),
            "speculative_calls": self.speculative_calls,
            "speculative_input_tokens": self.speculative_input_tokens,
            "speculative_output_tokens": self.speculative_output_tokens,
            "wasted_calls": self.wasted_calls,
        }


def compute_totals(events: Sequence[TraceEvent], cost_model: CostModel = GPT4O_MINI) -> TraceTotals:
    """Fold a trace into totals; token and cost figures cover every recorded call."""
    inp = sum(e.usage.input_tokens for e in events)
    out = sum(e.usage.output_tokens for e in events)
    spec = [e for e in events if e.speculative]
    return TraceTotals(
        calls=len(events),
        input_tokens=inp,
        output_tokens=out,
        cost=estimate_cost(CompletionUsage(inp, out), cost_model),
        critical_path_rounds=critical_path_rounds(events),
        modeled_latency=modeled_latency(events),
        speculative_calls=len(spec),
        speculative_input_tokens=sum(e.usage.input_tokens for e in spec),
        speculative_output_tokens=sum(e.usage.output_tokens for e in spec),
        wasted_calls=sum(1 for e in events if e.wasted),
    )


@dataclass
class Trace:
    """A finished trace plus the helpers reports need."""

    events: tuple[TraceEvent, ...] = field(default_factory=tuple)

    def totals(self, cost_model: CostModel = GPT4O_MINI) -> TraceTotals:
        return compute_totals(self.events, cost_model)

    def count(self, kind: EventKind) -> int:
        return sum(1 for e in self.events if e.kind == kind)
