"""Reference orchestrations: direct input, Chain of Agents, LLM x MapReduce.

All three share the ExtAgents result and trace format so they can be compared
call for call.  The MapReduce variant is the plain map / grouped-reduce
skeleton without confidence calibration.
"""

from __future__ import annotations

from dataclasses import dataclass

from .backend.base import Backends, Completion
from .backend.oracle import OracleWorld
from .config import RunConfig
from .errors import ConfigError
from .knowledge import KnowledgeSource, truncate_to_budget
from .reason import ReasoningOutcome
from .runtime import RunResult, aborting, build_backends, finish, prepare_chunks, worker_pool
from .sync import MESSAGE_SEPARATOR
from .trace import TraceRecorder


def _answer_outcome(completion: Completion, event_id: int, iteration: int = 1) -> ReasoningOutcome:
    return ReasoningOutcome("answered", completion.text.strip(), iteration, 1, 0, event_id)


def run_direct(query: str, source: KnowledgeSource, cfg: RunConfig, *, world: OracleWorld | None = None,
               backends: Backends | None = None) -> RunResult:
    """One call over the source truncated to what the reasoning window holds."""
    backends = backends or build_backends(cfg, world)
    counter = backends.counter
    template = backends.templates["direct"]
    room = backends.reasoning.config.max_context - template.overhead(counter, question=query) - 1
    if room <= 0:
        raise ConfigError("the question alone does not fit the reasoning window", field="max_context")
    kept = truncate_to_budget(source, min(cfg.input_budget, room), counter) if source.units else source
    recorder = TraceRecorder()
    with aborting(recorder, "direct"):
        completion = backends.reasoning.complete(template.render({"question": query, "context": kept.text}))
        event = recorder.add("baseline_step", usage=completion.usage, wall_time=completion.latency,
                             agent_index=0, timestep=1, status="answer")
    return finish("direct", _answer_outcome(completion, event.id), recorder, 1 if kept.units else 0, cfg)


def run_chain_of_agents(query: str, source: KnowledgeSource, cfg: RunConfig, *,
                        world: OracleWorld | None = None, backends: Backends | None = None) -> RunResult:
    """Agents read their chunk plus their predecessor's message, strictly in order."""
    backends = backends or build_backends(cfg, world)
    chunks = prepare_chunks(source, cfg)
    step = backends.templates["coa_step"]
    recorder = TraceRecorder()
    message, previous = "", None
    with aborting(recorder, "chain_of_agents"):
        for chunk in chunks:
            prompt = step.render({"question": query, "context": chunk.text, "extracted_information": message})
            completion = backends.seeking.complete(prompt)
            event = recorder.add("baseline_step", usage=completion.usage, wall_time=completion.latency,
                                 depends_on=[previous] if previous is not None else [],
                                 agent_index=chunk.index, timestep=chunk.index + 1,
                                 context=[chunk.index - 1] if previous is not None else [])
            message, previous = completion.text.strip(), event.id
        final = backends.templates["reason_final"].render({"question": query, "extracted_information": message})
        completion = backends.reasoning.complete(final)
        event = recorder.add("reduce", usage=completion.usage, wall_time=completion.latency,
                             depends_on=[previous] if previous is not None else [],
                             timestep=len(chunks) + 1, status="answer",
                             context=[len(chunks) - 1] if chunks else [])
    return finish("chain_of_agents", _answer_outcome(completion, event.id), recorder, len(chunks), cfg)


def mapreduce_fanin(query: str, cfg: RunConfig, backends: Backends) -> int:
    """Group size ``min(cap, floor((L - overhead - |q|) / |m|))``."""
    counter = backends.counter
    overhead = backends.templates["reduce"].overhead(counter, question=query)
    room = backends.reasoning.config.max_context - overhead
    fanin = min(cfg.baseline.group_fanin_cap, room // cfg.baseline.expected_message_len)
    if fanin < 2:
        raise ConfigError(f"reduce fan-in {fanin} < 2; shrink expected_message_len or raise max_context",
                          field="baseline.expected_message_len")
    return fanin


@dataclass(frozen=True)
class _Node:
    text: str
    event_id: int


def run_llm_mapreduce(query: str, source: KnowledgeSource, cfg: RunConfig, *,
                      world: OracleWorld | None = None, backends: Backends | None = None) -> RunResult:
    """Map every chunk in parallel, then reduce level by level in consecutive groups."""
    backends = backends or build_backends(cfg, world)
    counter = backends.counter
    chunks = prepare_chunks(source, cfg)
    fanin = mapreduce_fanin(query, cfg, backends)
    limit_m = cfg.baseline.expected_message_len

    def clip(text: str) -> str:
        text = text.strip()
        return text[:counter.cut(text, limit_m)]

    recorder = TraceRecorder()
    seek_first = backends.templates["seek_first"]
    reduce = backends.templates["reduce"]
    with aborting(recorder, "llm_mapreduce"), worker_pool(cfg) as executor:
        futures = [executor.submit(backends.seeking.complete,
                                   seek_first.render({"question": query, "context": c.text})) for c in chunks]
        level: list[_Node] = []
        for chunk, future in zip(chunks, futures):
            completion = future.result()
            event = recorder.add("baseline_step", usage=completion.usage, wall_time=completion.latency,
                                 agent_index=chunk.index, timestep=1)
            level.append(_Node(clip(completion.text), event.id))
        depth = 1
        while len(level) > fanin:
            depth += 1
            groups = [level[i:i + fanin] for i in range(0, len(level), fanin)]
            futures = [executor.submit(backends.reasoning.complete, reduce.render({
                "question": query, "extracted_information": MESSAGE_SEPARATOR.join(n.text for n in group)}))
                for group in groups]
            nxt = []
            for group, future in zip(groups, futures):
                completion = future.result()
                event = recorder.add("reduce", usage=completion.usage, wall_time=completion.latency,
                                     depends_on=[n.event_id for n in group], timestep=depth)
                nxt.append(_Node(clip(completion.text), event.id))
            level = nxt
        final = backends.templates["reason_final"].render({
            "question": query, "extracted_information": MESSAGE_SEPARATOR.join(n.text for n in level)})
        completion = backends.reasoning.complete(final)
        event = recorder.add("reduce", usage=completion.usage, wall_time=completion.latency,
                             depends_on=[n.event_id for n in level], timestep=depth + 1, status="answer")
    return finish("llm_mapreduce", _answer_outcome(completion, event.id), recorder, len(chunks), cfg)
