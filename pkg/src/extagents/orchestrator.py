"""End-to-end ExtAgents runs.

A run truncates and partitions the source, then alternates a
synchronization timestep with a reasoning round until an answer appears or
``T`` timesteps have passed, after which a forced terminal attempt reads the
last pool.  Only the first round walks the full power-of-two schedule;
later rounds try the whole pool once.
"""

from __future__ import annotations

import logging
from concurrent.futures import Executor
from typing import Sequence

from .backend.base import Backends
from .backend.oracle import OracleWorld
from .config import RunConfig
from .errors import ConfigError
from .knowledge import KnowledgeChunk, KnowledgeSource
from .reason import (
    ReasoningContext,
    ReasoningOutcome,
    Schedule,
    attempt_call,
    build_schedule,
    record_attempt,
    run_reasoning_round,
    run_terminal_attempt,
)
from .runtime import RunResult, aborting, build_backends, finish, prepare_chunks, worker_pool
from .sync import (
    AgentMessage,
    MessagePool,
    RelevanceScore,
    SyncState,
    advance_state,
    agent_step,
    max_k_under_budget,
    record_seek,
    retrieval_priority_scores,
    run_sync_timestep,
)
from .trace import TraceRecorder

log = logging.getLogger(__name__)


def round_schedule(pool: MessagePool, round_index: int, cfg: RunConfig) -> Schedule:
    n = max(pool.live_count, 1)
    if round_index == 1 or cfg.accumulate_every_round:
        return build_schedule(n, cfg.S, first_exponent=cfg.schedule_first_exponent)
    return Schedule((n,), cfg.S)


def check_chunks_fit(query: str, chunks: Sequence[KnowledgeChunk], backends: Backends) -> None:
    """Fail before any call when a chunk cannot fit its first-iteration prompt."""
    counter = backends.counter
    limit = backends.seeking.config.max_context
    overhead = backends.templates["seek_first"].overhead(counter)
    q = counter.count(query)
    for chunk in chunks:
        max_k_under_budget(q, chunk.token_len, [], limit, overhead, chunk_index=chunk.index)


def _empty_source(query: str, backends: Backends, recorder: TraceRecorder) -> ReasoningOutcome:
    pool = MessagePool(0, (), ())
    return run_terminal_attempt(query, pool, backends, recorder=recorder)


def run_extagents(query: str, source: KnowledgeSource, cfg: RunConfig, *, world: OracleWorld | None = None,
                  backends: Backends | None = None) -> RunResult:
    """Run the ExtAgents loop; dispatches to :func:`run_interleaved` when configured."""
    if cfg.method != "extagents":
        raise ConfigError(f"run_extagents needs method extagents, got {cfg.method}", field="method")
    if cfg.interleaved:
        return run_interleaved(query, source, cfg, world=world, backends=backends)
    return _run(query, source, cfg, world, backends, interleaved=False)


def run_interleaved(query: str, source: KnowledgeSource, cfg: RunConfig, *, world: OracleWorld | None = None,
                    backends: Backends | None = None) -> RunResult:
    """Like :func:`run_extagents`, overlapping first-round seeks with reasoning."""
    if not cfg.interleaved or cfg.ranking_mode != "retrieval_priority":
        raise ConfigError("run_interleaved needs interleaved=true and ranking_mode retrieval_priority",
                          field="interleaved")
    return _run(query, source, cfg, world, backends, interleaved=True)


def _run(query: str, source: KnowledgeSource, cfg: RunConfig, world: OracleWorld | None,
         backends: Backends | None, *, interleaved: bool) -> RunResult:
    backends = backends or build_backends(cfg, world)
    chunks = prepare_chunks(source, cfg)
    check_chunks_fit(query, chunks, backends)
    recorder = TraceRecorder()
    with aborting(recorder, "extagents"), worker_pool(cfg) as executor:
        if not chunks:
            outcome = _empty_source(query, backends, recorder)
            return finish("extagents", outcome, recorder, 0, cfg)
        state = SyncState(query, tuple(chunks))
        outcome: ReasoningOutcome | None = None
        for r in range(1, cfg.T + 1):
            after = [outcome.event_id] if outcome is not None and outcome.event_id is not None else []
            if r == 1 and interleaved:
                state, outcome = _interleaved_first_round(state, cfg, backends, recorder, executor)
            else:
                state = run_sync_timestep(state, backends, options=cfg.sync_options, executor=executor,
                                          recorder=recorder, after=after)
                assert state.pool is not None
                outcome = run_reasoning_round(query, state.pool, round_schedule(state.pool, r, cfg),
                                              backends, recorder=recorder)
            if outcome.status == "answered":
                return finish("extagents", outcome, recorder, len(chunks), cfg)
        assert state.pool is not None and outcome is not None
        after = [outcome.event_id] if outcome.event_id is not None else []
        outcome = run_terminal_attempt(query, state.pool, backends, recorder=recorder, after=after)
        return finish("extagents", outcome, recorder, len(chunks), cfg)


def _interleaved_first_round(state: SyncState, cfg: RunConfig, backends: Backends, recorder: TraceRecorder,
                             executor: Executor) -> tuple[SyncState, ReasoningOutcome]:
    """First timestep plus first reasoning round, seeking rank tiers ahead of reasoning.

    Chunks are sought in retrieval-rank order in doubling tiers.  Reasoning
    over the top ``2^j`` messages starts as soon as the seeks finished so far
    contain that many live messages, while the next tier is sought
    speculatively.  Contexts, and hence outcomes, match the sequential run.
    """
    query, chunks = state.query, state.chunks
    n = len(chunks)
    priority = retrieval_priority_scores(chunks)
    order = sorted(range(n), key=lambda i: -priority[i])
    done: dict[int, AgentMessage] = {}
    positions_launched = 0
    used_prefix = 0

    def launch_wave() -> list:
        nonlocal positions_launched
        start = positions_launched
        end = min(n, max(start + 1, 2 * start))
        positions_launched = end
        return [(p, executor.submit(agent_step, state, order[p], 1, backends, cfg.sync_options))
                for p in range(start, end)]

    def commit(wave: list, speculative: bool) -> None:
        for p, future in wave:
            result = future.result()
            message = record_seek(recorder, result.message, result.seek, [], speculative=speculative)
            done[order[p]] = message

    def ranked_prefix() -> list[AgentMessage]:
        """Live messages among the finished seeks, in rank order, stopping at the first gap."""
        out = []
        for p in range(n):
            message = done.get(order[p])
            if message is None:
                break
            if not message.is_no_information:
                out.append(message)
        return out

    def prefix_positions(count: int) -> int:
        """Shortest rank prefix holding ``count`` live messages (all of it if fewer exist)."""
        seen = 0
        for p in range(n):
            if order[p] not in done:
                return p
            if not done[order[p]].is_no_information:
                seen += 1
                if seen == count:
                    return p + 1
        return n

    def seek_deps(count: int) -> list[int]:
        nonlocal used_prefix
        positions = prefix_positions(count)
        used_prefix = max(used_prefix, positions)
        return [done[order[p]].event_id for p in range(positions)]

    def run_attempt(context: ReasoningContext, deps: list[int]) -> ReasoningOutcome:
        result, completion, used = attempt_call(query, context, False, backends)
        return record_attempt(recorder, result, completion, used, deps)

    commit(launch_wave(), speculative=False)
    attempted = 0
    previous: list[int] = []
    outcome: ReasoningOutcome | None = None
    while True:
        j = attempted
        target = 2 ** (j + cfg.schedule_first_exponent) if j < cfg.S - 1 else None
        while positions_launched < n and (target is None or len(ranked_prefix()) < target):
            commit(launch_wave(), speculative=False)
        if positions_launched == n:
            live = ranked_prefix()
            schedule = build_schedule(max(len(live), 1), cfg.S, first_exponent=cfg.schedule_first_exponent)
            for s in range(attempted + 1, len(schedule) + 1):
                size = schedule.sizes[s - 1]
                context = ReasoningContext(s, tuple(live[:size]), 1)
                outcome = run_attempt(context, [*seek_deps(n + 1), *previous])
                previous = [outcome.event_id]
                if outcome.status == "answered":
                    break
            break
        # the finished prefix already decides the top-``target`` messages
        assert target is not None
        context = ReasoningContext(j + 1, tuple(ranked_prefix()[:target]), 1)
        deps = [*seek_deps(target), *previous]
        wave = launch_wave() if positions_launched < n else []
        future = executor.submit(attempt_call, query, context, False, backends)
        result, completion, used = future.result()
        outcome = record_attempt(recorder, result, completion, used, deps)
        commit(wave, speculative=True)
        previous = [outcome.event_id]
        attempted += 1
        if outcome.status == "answered":
            break

    assert outcome is not None
    if outcome.status == "answered":
        recorder.mark_wasted(done[order[p]].event_id for p in range(used_prefix, n) if order[p] in done)
        return state, outcome
    messages = [done[i] for i in range(n)]
    scores = [RelevanceScore(i, 1, 0 if m.is_no_information else priority[i]) for i, m in enumerate(messages)]
    return advance_state(state, messages, scores, list(range(n)), cfg.sync_options), outcome


def run(query: str, source: KnowledgeSource, cfg: RunConfig, *, world: OracleWorld | None = None,
        backends: Backends | None = None) -> RunResult:
    """Run whichever method ``cfg`` names."""
    from . import baselines

    if cfg.method == "extagents":
        return run_extagents(query, source, cfg, world=world, backends=backends)
    runner = {
        "direct": baselines.run_direct,
        "chain_of_agents": baselines.run_chain_of_agents,
        "llm_mapreduce": baselines.run_llm_mapreduce,
    }[cfg.method]
    return runner(query, source, cfg, world=world, backends=backends)


__all__ = [
    "RunResult",
    "check_chunks_fit",
    "round_schedule",
    "run",
    "run_extagents",
    "run_interleaved",
]
