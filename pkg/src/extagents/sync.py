"""Global knowledge synchronization between Seeking Agents.

At each timestep every agent re-reads its own chunk together with the
highest-ranked messages of the whole previous pool, as many as its context
window allows, and emits a new message.  New messages are then rated (or
ranked by retrieval order) to form the next pool.
"""

from __future__ import annotations

import logging
import re
from concurrent.futures import Executor
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

from .backend.base import NO_INFORMATION, Backends, Completion, is_sentinel
from .backend.templates import ordinal
from .errors import AgentCallError, BudgetError, ScoringError
from .knowledge import KnowledgeChunk
from .trace import TraceRecorder

log = logging.getLogger(__name__)

RankingMode = Literal["llm_rated", "retrieval_priority"]
RANKING_MODES = ("llm_rated", "retrieval_priority")

MESSAGE_SEPARATOR = "\n\n"
_SCORE = re.compile(r"score\s*[:：]\s*(-?\d+(?:\.\d+)?)", re.IGNORECASE)


@dataclass(frozen=True)
class AgentMessage:
    agent_index: int
    timestep: int
    text: str
    token_len: int
    is_no_information: bool
    sources_seen: frozenset[int] = frozenset()
    event_id: int | None = None

    def __post_init__(self) -> None:
        if self.timestep < 1 or self.agent_index < 0:
            raise ValueError("messages need timestep >= 1 and a non-negative agent index")
        if self.is_no_information and self.text != NO_INFORMATION:
            raise ValueError("a no-information message must carry the sentinel text")


@dataclass(frozen=True)
class RelevanceScore:
    agent_index: int
    timestep: int
    value: float
    event_id: int | None = None


@dataclass(frozen=True)
class MessagePool:
    timestep: int
    messages: tuple[AgentMessage, ...]
    scores: tuple[RelevanceScore, ...]
    ranking_mode: RankingMode = "llm_rated"

    def __post_init__(self) -> None:
        n = len(self.messages)
        if [m.agent_index for m in self.messages] != list(range(n)):
            raise ValueError("pool messages must be indexed 0..N-1 in order")
        if [s.agent_index for s in self.scores] != list(range(n)):
            raise ValueError("pool scores must be indexed 0..N-1 in order")
        for message, score in zip(self.messages, self.scores):
            if message.is_no_information and score.value != 0:
                raise ValueError("no-information messages must score 0")

    def __len__(self) -> int:
        return len(self.messages)

    def ranked(self) -> list[AgentMessage]:
        """Live messages by descending score, ties to the lower agent index."""
        live = [m for m in self.messages if not m.is_no_information]
        return sorted(live, key=lambda m: (-self.scores[m.agent_index].value, m.agent_index))

    @property
    def live_count(self) -> int:
        return sum(1 for m in self.messages if not m.is_no_information)

    def barrier_ids(self) -> list[int]:
        """Events that must finish before the pool's ranking is known."""
        ids = []
        for message, score in zip(self.messages, self.scores):
            event_id = score.event_id if score.event_id is not None else message.event_id
            if event_id is not None:
                ids.append(event_id)
        return ids


def select_top_k(pool: MessagePool, k: int) -> list[AgentMessage]:
    """The ``k`` highest-scored live messages.

    Scores are non-negative and the objective is a plain sum, so the best
    subset of size ``k`` is simply the ``k`` best messages.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    return pool.ranked()[:k]


def retrieval_priority_scores(chunks: Sequence[KnowledgeChunk]) -> list[int]:
    """Score ``N - position`` with position ordered by retrieval rank, then index."""
    order = sorted(range(len(chunks)), key=lambda i: (
        chunks[i].retrieval_rank is None, chunks[i].retrieval_rank or 0, i))
    scores = [0] * len(chunks)
    for position, i in enumerate(order):
        scores[i] = len(chunks) - position
    return scores


def max_k_under_budget(query_tokens: int, chunk_tokens: int, message_tokens: Sequence[int],
                       limit: int, overhead: int = 0, *, separator_tokens: int = 1,
                       chunk_index: int | None = None) -> int:
    """Largest ``k`` whose prompt stays strictly under ``limit`` tokens.

    ``message_tokens`` are the candidate lengths in rank order; every message
    after the first also pays for one separator.
    """
    used = query_tokens + chunk_tokens + overhead
    if used >= limit:
        raise BudgetError(
            f"chunk {chunk_index} does not fit: question {query_tokens} + chunk {chunk_tokens}"
            f" + template {overhead} >= {limit}",
            tokens=used, limit=limit, chunk_index=chunk_index)
    k = 0
    for i, tokens in enumerate(message_tokens):
        used += tokens + (separator_tokens if i else 0)
        if used >= limit:
            break
        k += 1
    return k


def parse_score(reply: str) -> float:
    """First ``Score:`` value in the reply, clamped to [0, 100]."""
    match = _SCORE.search(reply)
    if match is None:
        raise ScoringError(f"no score in rating reply {reply[:80]!r}")
    value = float(match.group(1))
    value = min(100.0, max(0.0, value))
    return int(value) if value.is_integer() else value


def join_messages(messages: Sequence[AgentMessage]) -> str:
    return MESSAGE_SEPARATOR.join(m.text for m in messages)


def seek_prompt(query: str, chunk: KnowledgeChunk, prior_context: Sequence[AgentMessage],
                iteration: int, backends: Backends) -> str:
    templates = backends.templates
    if iteration <= 1:
        return templates["seek_first"].render({"question": query, "context": chunk.text})
    return templates["seek_update"].render({
        "question": query,
        "context": chunk.text,
        "iteration": ordinal(iteration, templates.language),
        "extracted_information": join_messages(prior_context),
    })


def _to_message(chunk: KnowledgeChunk, iteration: int, text: str, prior: Sequence[AgentMessage],
                backends: Backends) -> AgentMessage:
    sentinel = is_sentinel(text, NO_INFORMATION)
    body = NO_INFORMATION if sentinel else text
    return AgentMessage(chunk.index, iteration, body, backends.counter.count(body), sentinel,
                        frozenset(m.agent_index for m in prior))


def seek_call(query: str, chunk: KnowledgeChunk, prior_context: Sequence[AgentMessage],
              iteration: int, backends: Backends) -> tuple[AgentMessage, Completion]:
    completion = backends.seeking.complete(seek_prompt(query, chunk, prior_context, iteration, backends))
    return _to_message(chunk, iteration, completion.text, prior_context, backends), completion


def seek(query: str, chunk: KnowledgeChunk, prior_context: Sequence[AgentMessage], iteration: int,
         backends: Backends) -> AgentMessage:
    return seek_call(query, chunk, prior_context, iteration, backends)[0]


def rate_call(query: str, message: AgentMessage, backends: Backends) -> Completion:
    prompt = backends.templates["rate"].render({"question": query, "extracted_information": message.text})
    return backends.rating.complete(prompt)


def rate(query: str, message: AgentMessage, backends: Backends) -> RelevanceScore:
    if message.is_no_information:
        return RelevanceScore(message.agent_index, message.timestep, 0)
    value = parse_score(rate_call(query, message, backends).text)
    return RelevanceScore(message.agent_index, message.timestep, value)


def prior_context_for(query: str, chunk: KnowledgeChunk, pool: MessagePool | None, iteration: int,
                      backends: Backends) -> list[AgentMessage]:
    """The top-k pool messages this agent can afford at ``iteration``."""
    if iteration <= 1 or pool is None:
        return []
    counter = backends.counter
    limit = backends.seeking.config.max_context
    template = backends.templates["seek_update"]
    overhead = template.overhead(counter, iteration=ordinal(iteration, backends.templates.language))
    ranked = pool.ranked()
    k = max_k_under_budget(counter.count(query), chunk.token_len, [m.token_len for m in ranked],
                           limit, overhead, separator_tokens=counter.count(MESSAGE_SEPARATOR),
                           chunk_index=chunk.index)
    # the additive bound is exact for the approximate counter; other counters get a re-check
    while k > 0 and counter.count(seek_prompt(query, chunk, ranked[:k], iteration, backends)) >= limit:
        k -= 1
    return ranked[:k]


@dataclass(frozen=True)
class SyncOptions:
    ranking_mode: RankingMode = "llm_rated"
    exclusion: bool = False
    exclusion_patience: int = 2

    def __post_init__(self) -> None:
        if self.ranking_mode not in RANKING_MODES:
            raise ValueError(f"unknown ranking mode {self.ranking_mode!r}")
        if self.exclusion_patience < 1:
            raise ValueError("exclusion_patience must be >= 1")


@dataclass(frozen=True)
class SyncState:
    query: str
    chunks: tuple[KnowledgeChunk, ...]
    pool: MessagePool | None = None
    timestep: int = 0
    excluded: frozenset[int] = frozenset()
    streaks: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "chunks", tuple(self.chunks))
        if not self.streaks:
            object.__setattr__(self, "streaks", (0,) * len(self.chunks))


@dataclass(frozen=True)
class AgentResult:
    message: AgentMessage
    seek: Completion
    score: float | None = None
    rate: Completion | None = None


def agent_step(state: SyncState, index: int, t: int, backends: Backends,
                options: SyncOptions) -> AgentResult:
    chunk = state.chunks[index]
    try:
        prior = prior_context_for(state.query, chunk, state.pool, t, backends)
        message, completion = seek_call(state.query, chunk, prior, t, backends)
        if options.ranking_mode != "llm_rated" or message.is_no_information:
            return AgentResult(message, completion)
        rate_completion = rate_call(state.query, message, backends)
        try:
            value = parse_score(rate_completion.text)
        except ScoringError as exc:
            log.warning("agent %d, timestep %d: %s; scoring as 0", index, t, exc)
            value = 0
        return AgentResult(message, completion, value, rate_completion)
    except Exception as exc:
        raise AgentCallError(f"agent {index} failed at timestep {t}: {exc}", agent_index=index,
                             cause=exc) from exc


def record_seek(recorder: TraceRecorder, message: AgentMessage, completion: Completion,
                depends_on: Sequence[int], *, speculative: bool = False) -> AgentMessage:
    """Append a seek event and return the message stamped with its id."""
    event = recorder.add("seek", usage=completion.usage, wall_time=completion.latency,
                         depends_on=depends_on, agent_index=message.agent_index, timestep=message.timestep,
                         status="no_information" if message.is_no_information else "message",
                         context=sorted(message.sources_seen), speculative=speculative)
    return replace(message, event_id=event.id)


def run_sync_timestep(state: SyncState, backends: Backends, *, options: SyncOptions = SyncOptions(),
                      executor: Executor | None = None, recorder: TraceRecorder | None = None,
                      after: Sequence[int] = ()) -> SyncState:
    """Advance every non-excluded agent by one timestep.

    Agents run concurrently on ``executor`` when one is given; results are
    merged and traced in agent order, so the successor state does not depend
    on scheduling.  ``after`` lists extra trace events every seek waits on.
    """
    t = state.timestep + 1
    n = len(state.chunks)
    active = [i for i in range(n) if i not in state.excluded]
    if executor is None:
        results = [agent_step(state, i, t, backends, options) for i in active]
    else:
        futures = [executor.submit(agent_step, state, i, t, backends, options) for i in active]
        results = []
        first_error: BaseException | None = None
        for future in futures:
            try:
                results.append(future.result())
            except BaseException as exc:  # keep draining so no call outlives the timestep
                first_error = first_error or exc
        if first_error is not None:
            raise first_error
    by_agent = dict(zip(active, results))

    prev = state.pool
    barrier = prev.barrier_ids() if prev is not None else []
    messages: list[AgentMessage] = []
    for i in range(n):
        if i in by_agent:
            res = by_agent[i]
            message = res.message
            if recorder is not None:
                deps = [m.event_id for m in prev.messages if m.agent_index in message.sources_seen
                        and m.event_id is not None] if prev is not None else []
                message = record_seek(recorder, message, res.seek, [*deps, *barrier, *after])
            messages.append(message)
        else:
            assert prev is not None
            messages.append(prev.messages[i])

    if options.ranking_mode == "retrieval_priority":
        priority = retrieval_priority_scores(state.chunks)
    scores: list[RelevanceScore] = []
    for i, message in enumerate(messages):
        if i not in by_agent or message.is_no_information:
            scores.append(RelevanceScore(i, t, 0))
        elif options.ranking_mode == "retrieval_priority":
            scores.append(RelevanceScore(i, t, priority[i]))
        else:
            res = by_agent[i]
            event_id = None
            if recorder is not None and res.rate is not None:
                event_id = recorder.add("rate", usage=res.rate.usage, wall_time=res.rate.latency,
                                        depends_on=[message.event_id] if message.event_id is not None else [],
                                        agent_index=i, timestep=t, status=str(res.score)).id
            scores.append(RelevanceScore(i, t, res.score or 0, event_id))

    return advance_state(state, messages, scores, active, options)


def advance_state(state: SyncState, messages: Sequence[AgentMessage], scores: Sequence[RelevanceScore],
                  active: Sequence[int], options: SyncOptions) -> SyncState:
    """Successor state from one timestep's merged messages and scores."""
    t = state.timestep + 1
    streaks = list(state.streaks)
    excluded = set(state.excluded)
    for i in active:
        streaks[i] = streaks[i] + 1 if messages[i].is_no_information else 0
        if options.exclusion and streaks[i] >= options.exclusion_patience:
            excluded.add(i)
    pool = MessagePool(t, tuple(messages), tuple(scores), options.ranking_mode)
    return SyncState(state.query, state.chunks, pool, t, frozenset(excluded), tuple(streaks))
