"""Deterministic scripted backend for exact tests of orchestration logic.

A world is a question, its answer and a set of atomic facts.  A fact is
"present" in a piece of text when its exact text occurs there, so the world
knows which facts every chunk holds without tracking chunk ids.  The backend
recognises which prompt it was sent by matching it against the known
templates and replies by rule:

* extraction prompts list the present facts, highest priority first, dropping
  the lowest-priority ones until the reply fits the message budget;
* update prompts list only facts not already in the previous information;
* rating prompts score ``100 * required facts present / required facts``;
* reasoning prompts answer when every required fact is present (or reply
  ``NO ANSWER``); terminal prompts never refuse and fall back to a guess;
* more decoy facts than the tolerance make every answer the decoy answer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Literal, Mapping, Sequence

from ..errors import ProtocolError
from ..knowledge import DEFAULT_COUNTER, TokenCounter
from .base import NO_ANSWER, NO_INFORMATION, Completion, check_budget
from .config import BackendConfig
from .cost import CompletionUsage
from .templates import PromptTemplate, builtin_templates, unique

FactRole = Literal["required", "distractor", "decoy"]

GUESS_MARKER = "oracle-guess"


@dataclass(frozen=True)
class Fact:
    id: str
    text: str
    priority: int = 0
    role: FactRole = "required"


@dataclass(frozen=True)
class OracleWorld:
    question: str
    answer: str
    facts: tuple[Fact, ...] = ()
    decoy_answer: str = "decoy-answer"
    decoy_tolerance: int = 0
    guess: str = GUESS_MARKER

    def __post_init__(self) -> None:
        object.__setattr__(self, "facts", tuple(self.facts))
        ids = [f.id for f in self.facts]
        if len(set(ids)) != len(ids):
            raise ValueError("fact ids must be unique")

    @property
    def required(self) -> tuple[Fact, ...]:
        return tuple(f for f in self.facts if f.role == "required")

    def present(self, text: str) -> list[Fact]:
        return [f for f in self.facts if f.text in text]

    def to_record(self) -> dict[str, Any]:
        return {
            "question": self.question,
            "answer": self.answer,
            "decoy_answer": self.decoy_answer,
            "decoy_tolerance": self.decoy_tolerance,
            "guess": self.guess,
            "facts": [{"id": f.id, "text": f.text, "priority": f.priority, "role": f.role}
                      for f in self.facts],
        }

    @classmethod
    def from_record(cls, record: Mapping[str, Any]) -> OracleWorld:
        facts = tuple(Fact(str(f["id"]), f["text"], int(f.get("priority", 0)), f.get("role", "required"))
                      for f in record.get("facts", ()))
        return cls(record["question"], record["answer"], facts,
                   record.get("decoy_answer", "decoy-answer"), int(record.get("decoy_tolerance", 0)),
                   record.get("guess", GUESS_MARKER))


@dataclass
class OracleBackend:
    config: BackendConfig
    world: OracleWorld
    counter: TokenCounter = DEFAULT_COUNTER
    templates: Sequence[PromptTemplate] | None = None
    _known: list[PromptTemplate] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._known = unique([*(self.templates or ()), *builtin_templates()])
        self._order = {f.id: i for i, f in enumerate(self.world.facts)}

    def complete(self, prompt: str) -> Completion:
        prompt_tokens = check_budget(self.config, self.counter, prompt)
        reply = self.reply(prompt)
        usage = CompletionUsage(prompt_tokens, self.counter.count(reply))
        latency = self.config.latency_base + self.config.latency_per_token * (
            usage.input_tokens + usage.output_tokens)
        return Completion(reply, usage, round(latency, 9))

    def reply(self, prompt: str) -> str:
        name, parts = self._parse(prompt)
        world = self.world
        if name == "seek_first":
            return self._bounded(world.present(parts["context"]))
        if name == "seek_update":
            known = {f.id for f in world.present(parts["extracted_information"])}
            return self._bounded([f for f in world.present(parts["context"]) if f.id not in known])
        if name == "coa_step":
            carried = world.present(parts["context"] + "\n" + parts["extracted_information"])
            return self._bounded(carried)
        if name == "reduce":
            return self._bounded(world.present(parts["extracted_information"]))
        if name == "rate":
            return f"Score: {self.score(world.present(parts['extracted_information']))}"
        if name == "reason":
            return self._answer(world.present(parts["extracted_information"]), terminal=False)
        if name == "reason_final":
            return self._answer(world.present(parts["extracted_information"]), terminal=True)
        if name == "direct":
            return self._answer(world.present(parts["context"]), terminal=True)
        raise ProtocolError(f"oracle has no rule for template {name!r}")

    def score(self, present: Iterable[Fact]) -> int:
        required = self.world.required
        if not required:
            return 0
        hits = sum(1 for f in present if f.role == "required")
        return round(100 * hits / len(required))

    def _parse(self, prompt: str) -> tuple[str, dict[str, str]]:
        for template in self._known:
            parts = template.parse(prompt)
            if parts is not None:
                return template.name, parts
        raise ProtocolError("oracle could not match the prompt to any known template")

    def _bounded(self, facts: list[Fact]) -> str:
        ranked = sorted(facts, key=lambda f: (-f.priority, self._order[f.id]))
        while ranked:
            text = "\n".join(f.text for f in ranked)
            if self.counter.count(text) <= self.config.message_budget:
                return text
            ranked.pop()
        return NO_INFORMATION

    def _answer(self, present: list[Fact], *, terminal: bool) -> str:
        world = self.world
        decoys = sum(1 for f in present if f.role == "decoy")
        if decoys > world.decoy_tolerance:
            return world.decoy_answer
        have = {f.id for f in present}
        if all(f.id in have for f in world.required):
            return world.answer
        return world.guess if terminal else NO_ANSWER
