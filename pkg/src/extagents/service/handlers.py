"""Operations shared by the HTTP service and the local command line."""

from __future__ import annotations

import logging
from typing import Any, Iterable, Mapping, Sequence

from ..backend.config import BackendConfig
from ..backend.cost import CostModel
from ..config import RunConfig
from ..datasets import Sample
from ..errors import ConfigError, ExtAgentsError, RunAborted
from ..evaluation import EvalReport, FilterResult, evaluate, filter_benchmark
from ..latency import LatencyRow, bench_latency
from ..orchestrator import run
from ..records import RESULT_SCHEMA, TRACE_SCHEMA, ReplayResult, replay, result_record

log = logging.getLogger(__name__)


def check_oracle_worlds(samples: Iterable[Sample], backends: Iterable[BackendConfig]) -> None:
    """Fail before any work when an oracle backend meets a sample without a scripted world."""
    if not any(b.kind == "oracle" for b in backends):
        return
    for sample in samples:
        if sample.oracle is None:
            raise ConfigError(f"sample {sample.id} has no oracle world but the backend kind is oracle",
                              field="oracle")


def _roles(cfg: RunConfig) -> list[BackendConfig]:
    roles = cfg.role_backends
    return [roles.seeking, roles.reasoning, roles.rater]


def failure_record(sample: Sample, cfg: RunConfig, exc: ExtAgentsError) -> dict[str, Any]:
    events = [e.to_record() for e in exc.partial_trace] if isinstance(exc, RunAborted) else []
    return {
        "schema": RESULT_SCHEMA,
        "sample_id": sample.id,
        "method": cfg.method,
        "error": str(exc),
        "error_type": type(exc.cause if isinstance(exc, RunAborted) else exc).__name__,
        "trace": {"schema": TRACE_SCHEMA, "sample_id": sample.id, "method": cfg.method, "answer": None,
                  "outcome": None, "n_chunks": None, "events": events},
    }


def run_samples(samples: Sequence[Sample], cfg: RunConfig, *,
                include_trace: bool = True) -> tuple[list[dict[str, Any]], int]:
    """Run every sample in order; returns result records and the number of failures."""
    check_oracle_worlds(samples, _roles(cfg))
    records, failed = [], 0
    for sample in samples:
        sample_cfg = cfg if sample.language == cfg.language else cfg.with_changes(language=sample.language)
        try:
            result = run(sample.question, sample.source(sample_cfg.counter), sample_cfg, world=sample.oracle)
        except ConfigError:
            raise
        except ExtAgentsError as exc:
            log.warning("sample %s failed: %s", sample.id, exc)
            records.append(failure_record(sample, cfg, exc))
            failed += 1
            continue
        records.append(result_record(result, sample.id, cfg.cost_model, include_trace=include_trace))
    return records, failed


def evaluate_samples(samples: Sequence[Sample], cfg: RunConfig, runs: int = 1) -> EvalReport:
    check_oracle_worlds(samples, _roles(cfg))
    return evaluate(samples, cfg, runs)


def filter_samples(samples: Sequence[Sample], window: int, judge: BackendConfig, keep_over: int, *,
                   threshold: float, stride: str = "window", task: str = "infbench",
                   workers: int = 1) -> FilterResult:
    check_oracle_worlds(samples, [judge])
    return filter_benchmark(samples, window, judge, keep_over, threshold=threshold, stride=stride,  # type: ignore[arg-type]
                            task=task, workers=workers)


def latency_table(cfg: RunConfig, methods: Sequence[str], grid: Sequence[int]) -> list[LatencyRow]:
    for method in methods:
        cfg.with_changes(method=method)  # validates the name
    return bench_latency(cfg, methods, grid)


def replay_records(records: Iterable[Mapping[str, Any]], cost_model: CostModel) -> list[ReplayResult]:
    return [replay(r, cost_model) for r in records]
