"""Benchmark filtering: drop samples a judge answers from one small window."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal, Sequence

from ..backend.base import make_backend
from ..backend.config import BackendConfig
from ..backend.templates import load_templates
from ..datasets import Sample
from ..errors import ConfigError, ExtAgentsError
from ..knowledge import DEFAULT_COUNTER, TokenCounter
from .metrics import token_f1

log = logging.getLogger(__name__)

AUDIT_SCHEMA = "extagents.audit/v1"
DEFAULT_THRESHOLD = 0.5

Decision = Literal["discarded", "retained", "kept_long", "undetermined"]
Stride = Literal["window", "half"]


@dataclass(frozen=True)
class AuditEntry:
    sample_id: str
    decision: Decision
    window_index: int | None
    judge_f1: float | None
    n_windows: int
    tokens: int
    window: int
    threshold: float
    stride: Stride = "window"
    error: str | None = None

    def to_record(self) -> dict[str, Any]:
        return {
            "schema": AUDIT_SCHEMA,
            "sample_id": self.sample_id,
            "decision": self.decision,
            "window_index": self.window_index,
            "judge_f1": self.judge_f1,
            "n_windows": self.n_windows,
            "tokens": self.tokens,
            "window": self.window,
            "threshold": self.threshold,
            "stride": self.stride,
            "error": self.error,
        }

    @property
    def kept(self) -> bool:
        return self.decision != "discarded"


@dataclass(frozen=True)
class FilterResult:
    kept: tuple[Sample, ...]
    audit: tuple[AuditEntry, ...]

    def retained_count(self) -> int:
        return len(self.kept)


def windows(text: str, window: int, counter: TokenCounter = DEFAULT_COUNTER,
            stride: Stride = "window") -> list[str]:
    """Window-sized slices of ``text``; ``half`` overlaps neighbours by half a window."""
    if window <= 0:
        raise ConfigError("window must be positive", field="window")
    if stride == "window":
        size = window
    elif stride == "half":
        size = window // 2
        if size <= 0:
            raise ConfigError("half stride needs a window of at least 2 tokens", field="window")
    else:
        raise ConfigError(f"unknown stride {stride!r}", field="stride")
    pieces, start = [], 0
    for end in counter.split_points(text, size):
        pieces.append(text[start:end])
        start = end
    if stride == "window" or len(pieces) < 2:
        return pieces
    return [pieces[i] + pieces[i + 1] for i in range(len(pieces) - 1)]


def judge_sample(sample: Sample, window: int, judge: BackendConfig, keep_over: int, *,
                 threshold: float = DEFAULT_THRESHOLD, stride: Stride = "window",
                 counter: TokenCounter = DEFAULT_COUNTER, task: str = "infbench",
                 templates_dir: str | Path | None = None) -> AuditEntry:
    """Sweep the windows of one sample in order, stopping at the first convicting one."""
    text = sample.source(counter).text
    tokens = counter.count(text)
    slices = windows(text, window, counter, stride) if text else []

    def entry(decision: Decision, index: int | None = None, f1: float | None = None,
              error: str | None = None) -> AuditEntry:
        return AuditEntry(sample.id, decision, index, f1, len(slices), tokens, window, threshold, stride, error)

    if tokens > keep_over:
        return entry("kept_long")
    best: float | None = None
    try:
        templates = load_templates(task, sample.language, templates_dir)
        backend = make_backend(judge, counter=counter, world=sample.oracle, templates=templates)
        direct = templates["direct"]
        for index, piece in enumerate(slices):
            reply = backend.complete(direct.render({"question": sample.question, "context": piece}))
            f1 = token_f1(reply.text.strip(), sample.gold_answers, sample.language)
            best = f1 if best is None else max(best, f1)
            if f1 >= threshold:
                return entry("discarded", index, f1)
    except ExtAgentsError as exc:
        log.warning("judge failed on sample %s: %s", sample.id, exc)
        return entry("undetermined", None, best, str(exc))
    return entry("retained", None, best)


def filter_benchmark(dataset: Sequence[Sample], window: int, judge: BackendConfig, keep_over: int, *,
                     threshold: float = DEFAULT_THRESHOLD, stride: Stride = "window",
                     counter: TokenCounter = DEFAULT_COUNTER, task: str = "infbench",
                     templates_dir: str | Path | None = None, workers: int = 1) -> FilterResult:
    """Keep the samples no single window answers, plus every sample over ``keep_over`` tokens.

    Output order follows the input; the audit has one entry per sample.
    """
    if window <= 0:
        raise ConfigError("window must be positive", field="window")
    if not 0 <= threshold <= 1:
        raise ConfigError("threshold must lie in [0, 1]", field="threshold")

    def one(sample: Sample) -> AuditEntry:
        return judge_sample(sample, window, judge, keep_over, threshold=threshold, stride=stride,
                            counter=counter, task=task, templates_dir=templates_dir)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        audit = list(pool.map(one, dataset))
    kept = tuple(s for s, a in zip(dataset, audit) if a.kept)
    return FilterResult(kept, tuple(audit))
