"""Knowledge-accumulating reasoning with an answerability gate.

The Reasoning Agent reads growing rank-prefixes of the message pool (top 1,
top 2, top 4, ... then everything) and either answers or refuses with the
``NO ANSWER`` sentinel; the first answer ends the round.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, Sequence

from .backend.base import NO_ANSWER, Backends, Completion, is_sentinel
from .errors import BudgetError
from .sync import AgentMessage, MessagePool, join_messages
from .trace import TraceRecorder

log = logging.getLogger(__name__)

OutcomeStatus = Literal["answered", "refused", "forced"]


@dataclass(frozen=True)
class Schedule:
    sizes: tuple[int, ...]
    S: int

    def __post_init__(self) -> None:
        sizes = tuple(self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if not sizes or sizes[0] < 1:
            raise ValueError("a schedule needs at least one positive size")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError(f"schedule sizes must be strictly increasing: {sizes}")

    def __len__(self) -> int:
        return len(self.sizes)


def build_schedule(n: int, s: int, *, first_exponent: int = 0) -> Schedule:
    """Power-of-two prefix sizes ``2^e`` for ``s`` exponents, capped at and ending with ``n``."""
    if n < 1 or s < 1:
        raise ValueError("build_schedule needs n >= 1 and s >= 1")
    sizes: list[int] = []
    for exponent in range(first_exponent, first_exponent + s):
        size = min(2 ** exponent, n)
        if not sizes or size > sizes[-1]:
            sizes.append(size)
    sizes[-1] = n
    return Schedule(tuple(sizes), s)


@dataclass(frozen=True)
class ReasoningContext:
    iteration: int
    messages: tuple[AgentMessage, ...]
    source_timestep: int


@dataclass(frozen=True)
class ReasoningOutcome:
    status: OutcomeStatus
    answer: str | None
    iteration: int
    timestep: int
    context_size: int = 0
    event_id: int | None = None

    def __post_init__(self) -> None:
        if (self.status == "refused") != (self.answer is None):
            raise ValueError("refusals carry no answer; answers and forced answers must")

    def to_record(self) -> dict:
        return {"status": self.status, "answer": self.answer, "iteration": self.iteration,
                "timestep": self.timestep, "context_size": self.context_size}

    @classmethod
    def from_record(cls, record: dict) -> ReasoningOutcome:
        return cls(record["status"], record.get("answer"), int(record["iteration"]),
                   int(record["timestep"]), int(record.get("context_size", 0)))


def contexts(pool: MessagePool, schedule: Schedule) -> list[ReasoningContext]:
    """Rank-prefix contexts for every schedule size; each extends the previous one."""
    ranked = pool.ranked()
    return [ReasoningContext(s, tuple(ranked[:size]), pool.timestep)
            for s, size in enumerate(schedule.sizes, start=1)]


def reason_prompt(query: str, messages: Sequence[AgentMessage], terminal: bool, backends: Backends) -> str:
    name = "reason_final" if terminal else "reason"
    return backends.templates[name].render({"question": query, "extracted_information": join_messages(messages)})


def attempt_call(query: str, context: ReasoningContext, terminal: bool,
                 backends: Backends) -> tuple[ReasoningOutcome, Completion, tuple[AgentMessage, ...]]:
    counter = backends.counter
    limit = backends.reasoning.config.max_context
    messages = context.messages
    prompt = reason_prompt(query, messages, terminal, backends)
    while messages and counter.count(prompt) >= limit:
        messages = messages[:-1]
        prompt = reason_prompt(query, messages, terminal, backends)
    if len(messages) < len(context.messages):
        log.warning("reasoning context cut from %d to %d messages to fit %d tokens",
                    len(context.messages), len(messages), limit)
    if counter.count(prompt) >= limit:
        raise BudgetError("the question alone does not fit the reasoning window",
                          tokens=counter.count(prompt), limit=limit)
    completion = backends.reasoning.complete(prompt)
    text = completion.text.strip()
    if terminal:
        outcome = ReasoningOutcome("forced", text, context.iteration, context.source_timestep, len(messages))
    elif is_sentinel(text, NO_ANSWER):
        outcome = ReasoningOutcome("refused", None, context.iteration, context.source_timestep, len(messages))
    else:
        outcome = ReasoningOutcome("answered", text, context.iteration, context.source_timestep, len(messages))
    return outcome, completion, messages


def attempt(query: str, context: ReasoningContext, terminal: bool, backends: Backends) -> ReasoningOutcome:
    return attempt_call(query, context, terminal, backends)[0]


def _event_deps(messages: Sequence[AgentMessage]) -> list[int]:
    return [m.event_id for m in messages if m.event_id is not None]


def record_attempt(recorder: TraceRecorder | None, outcome: ReasoningOutcome, completion: Completion,
                   used: Sequence[AgentMessage], depends_on: Sequence[int]) -> ReasoningOutcome:
    if recorder is None:
        return outcome
    event = recorder.add("reason", usage=completion.usage, wall_time=completion.latency,
                         depends_on=depends_on, timestep=outcome.timestep, iteration=outcome.iteration,
                         status=outcome.status, context=[m.agent_index for m in used])
    return ReasoningOutcome(outcome.status, outcome.answer, outcome.iteration, outcome.timestep,
                            outcome.context_size, event.id)


def run_reasoning_round(query: str, pool: MessagePool, schedule: Schedule, backends: Backends, *,
                        recorder: TraceRecorder | None = None, after: Sequence[int] = ()) -> ReasoningOutcome:
    """Try each schedule prefix in turn; stop at the first answer.

    Every attempt waits for the whole pool's ranking plus the previous
    attempt; ``after`` adds extra dependencies to the first attempt.
    """
    barrier = pool.barrier_ids()
    previous: list[int] = list(after)
    outcome: ReasoningOutcome | None = None
    for context in contexts(pool, schedule):
        result, completion, used = attempt_call(query, context, False, backends)
        outcome = record_attempt(recorder, result, completion, used, [*barrier, *previous])
        if outcome.event_id is not None:
            previous = [outcome.event_id]
        if outcome.status == "answered":
            break
    assert outcome is not None
    return outcome


def run_terminal_attempt(query: str, pool: MessagePool, backends: Backends, *,
                         recorder: TraceRecorder | None = None, after: Sequence[int] = (),
                         iteration: int = 1) -> ReasoningOutcome:
    """The forced final attempt over every live message of ``pool``."""
    context = ReasoningContext(iteration, tuple(pool.ranked()), pool.timestep)
    result, completion, used = attempt_call(query, context, True, backends)
    return record_attempt(recorder, result, completion, used, [*pool.barrier_ids(), *after])
