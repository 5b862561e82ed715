"""Line-delimited dataset files: one question with its knowledge per line.

A record has ``id``, ``question``, ``answers`` (or a single ``answer``) and
either ``context`` (one long document) or ``documents`` (a list of
``{"id", "text", "rank"}``).  An optional ``oracle`` object scripts the
deterministic backend for that sample.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Literal, Mapping

from .backend.oracle import OracleWorld
from .errors import ConfigError
from .knowledge import DEFAULT_COUNTER, KnowledgeSource, TokenCounter

SAMPLE_SCHEMA = "extagents.sample/v1"


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    rank: int | None = None


@dataclass(frozen=True)
class Sample:
    id: str
    question: str
    gold_answers: tuple[str, ...]
    context: str | None = None
    documents: tuple[Document, ...] | None = None
    language: Literal["en", "zh"] = "en"
    oracle: OracleWorld | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not self.gold_answers:
            raise ConfigError(f"sample {self.id}: at least one gold answer is required", field="answers")
        if (self.context is None) == (self.documents is None):
            raise ConfigError(f"sample {self.id}: exactly one of context/documents is required",
                              field="context")

    def source(self, counter: TokenCounter = DEFAULT_COUNTER) -> KnowledgeSource:
        if self.context is not None:
            return KnowledgeSource.long_document(self.context, counter, unit_id=f"{self.id}:doc")
        docs = self.documents or ()
        # keep documents apart once packed: a trailing newline ends each one
        return KnowledgeSource.retrieved_corpus(
            [(d.id, d.text if d.text[-1:].isspace() else d.text + "\n", d.rank) for d in docs], counter)

    def to_record(self) -> dict[str, Any]:
        record: dict[str, Any] = {
            "schema": SAMPLE_SCHEMA,
            "id": self.id,
            "question": self.question,
            "answers": list(self.gold_answers),
            "language": self.language,
        }
        if self.context is not None:
            record["context"] = self.context
        else:
            record["documents"] = [{"id": d.id, "text": d.text, "rank": d.rank} for d in self.documents or ()]
        if self.oracle is not None:
            record["oracle"] = self.oracle.to_record()
        return record

    @classmethod
    def from_record(cls, record: Mapping[str, Any], *, line: int | None = None) -> Sample:
        where = f" (line {line})" if line is not None else ""
        schema = record.get("schema", SAMPLE_SCHEMA)
        if schema != SAMPLE_SCHEMA:
            raise ConfigError(f"unsupported sample schema {schema!r}{where}", field="schema")
        for name in ("id", "question"):
            if name not in record:
                raise ConfigError(f"sample record is missing {name!r}{where}", field=name)
        if "answers" in record:
            answers = record["answers"]
            if isinstance(answers, str):
                answers = [answers]
        elif "answer" in record:
            answers = [record["answer"]]
        else:
            raise ConfigError(f"sample record is missing 'answers'{where}", field="answers")
        documents = None
        if record.get("documents") is not None:
            try:
                documents = tuple(
                    Document(str(d.get("id", i)), d["text"], d.get("rank"))
                    for i, d in enumerate(record["documents"]))
            except (KeyError, AttributeError, TypeError) as exc:
                raise ConfigError(f"malformed documents{where}: {exc}", field="documents") from exc
        oracle = OracleWorld.from_record(record["oracle"]) if record.get("oracle") else None
        try:
            return cls(str(record["id"]), record["question"], tuple(str(a) for a in answers),
                       record.get("context"), documents, record.get("language", "en"), oracle)
        except ConfigError as exc:
            raise ConfigError(f"{exc}{where}", field=exc.field) from exc


def iter_samples(path: str | Path) -> Iterator[Sample]:
    try:
        handle = open(path, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read dataset {path}: {exc.strerror}", field="dataset") from exc
    with handle:
        for number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}:{number}: invalid JSON: {exc.msg}", field="dataset") from exc
            yield Sample.from_record(record, line=number)


def load_samples(path: str | Path) -> list[Sample]:
    samples = list(iter_samples(path))
    ids = [s.id for s in samples]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"{path}: duplicate sample ids", field="id")
    return samples


def dump_jsonl(records: Iterable[Mapping[str, Any]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def read_jsonl(path: str | Path) -> list[dict[str, Any]]:
    try:
        with open(path, encoding="utf-8") as handle:
            return [json.loads(line) for line in handle if line.strip()]
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc.msg}") from exc


def dump_samples(samples: Iterable[Sample], path: str | Path) -> None:
    dump_jsonl((s.to_record() for s in samples), path)
