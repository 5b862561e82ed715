"""Run a method over a dataset and score it."""

from __future__ import annotations

import logging
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import Decimal
from typing import Any, Mapping, Sequence

from ..config import RunConfig
from ..datasets import Sample
from ..errors import ConfigError, ExtAgentsError
from ..orchestrator import run
from .metrics import token_f1

log = logging.getLogger(__name__)

ROW_SCHEMA = "extagents.report_row/v1"
SUMMARY_SCHEMA = "extagents.report/v1"


@dataclass(frozen=True)
class EvalRow:
    run: int
    sample_id: str
    prediction: str | None
    f1: float | None
    outcome: str | None
    cost: Decimal
    calls: int
    critical_path_rounds: int
    input_tokens: int = 0
    output_tokens: int = 0
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    def to_record(self) -> dict[str, Any]:
        return {
            "schema": ROW_SCHEMA,
            "run": self.run,
            "sample_id": self.sample_id,
            "prediction": self.prediction,
            "f1": self.f1,
            "outcome": self.outcome,
            "cost": str(self.cost),
            "calls": self.calls,
            "critical_path_rounds": self.critical_path_rounds,
            "input_tokens": self.input_tokens,
            "output_tokens": self.output_tokens,
            "error": self.error,
        }

    @classmethod
    def from_record(cls, record: Mapping[str, Any]) -> EvalRow:
        if record.get("schema") != ROW_SCHEMA:
            raise ConfigError(f"not a report row: schema {record.get('schema')!r}", field="schema")
        return cls(int(record["run"]), str(record["sample_id"]), record.get("prediction"), record.get("f1"),
                   record.get("outcome"), Decimal(record.get("cost", "0")), int(record.get("calls", 0)),
                   int(record.get("critical_path_rounds", 0)), int(record.get("input_tokens", 0)),
                   int(record.get("output_tokens", 0)), record.get("error"))


@dataclass(frozen=True)
class RunAggregate:
    run: int
    mean_f1: float | None
    n_samples: int
    n_failed: int
    cost: Decimal
    calls: int
    input_tokens: int
    output_tokens: int

    def to_record(self) -> dict[str, Any]:
        return {"run": self.run, "mean_f1": self.mean_f1, "n_samples": self.n_samples,
                "n_failed": self.n_failed, "cost": str(self.cost), "calls": self.calls,
                "input_tokens": self.input_tokens, "output_tokens": self.output_tokens}


def aggregate_run(run_index: int, rows: Sequence[EvalRow]) -> RunAggregate:
    ok = [r for r in rows if not r.failed]
    mean = sum(r.f1 or 0.0 for r in ok) / len(ok) if ok else None
    return RunAggregate(run_index, mean, len(rows), len(rows) - len(ok), sum((r.cost for r in rows), Decimal(0)),
                        sum(r.calls for r in rows), sum(r.input_tokens for r in rows),
                        sum(r.output_tokens for r in rows))


@dataclass(frozen=True)
class EvalReport:
    method: str
    rows: tuple[EvalRow, ...]
    runs: tuple[RunAggregate, ...]

    @classmethod
    def from_rows(cls, method: str, rows: Sequence[EvalRow]) -> EvalReport:
        """Sort rows by (run, sample id) and recompute every aggregate from them."""
        ordered = tuple(sorted(rows, key=lambda r: (r.run, r.sample_id)))
        indices = sorted({r.run for r in ordered})
        runs = tuple(aggregate_run(i, [r for r in ordered if r.run == i]) for i in indices)
        return cls(method, ordered, runs)

    @property
    def median_of_runs(self) -> bool:
        return len(self.runs) > 1

    @property
    def mean_f1(self) -> float | None:
        """Median over runs of the per-run mean F1 (the plain mean for one run)."""
        means = [r.mean_f1 for r in self.runs if r.mean_f1 is not None]
        return statistics.median(means) if means else None

    @property
    def n_failed(self) -> int:
        return sum(r.n_failed for r in self.runs)

    def summary(self) -> dict[str, Any]:
        return {
            "schema": SUMMARY_SCHEMA,
            "method": self.method,
            "mean_f1": self.mean_f1,
            "median_of_runs": self.median_of_runs,
            "n_runs": len(self.runs),
            "n_failed": self.n_failed,
            "cost": str(sum((r.cost for r in self.runs), Decimal(0))),
            "calls": sum(r.calls for r in self.runs),
            "runs": [r.to_record() for r in self.runs],
        }

    def to_records(self) -> list[dict[str, Any]]:
        return [*(r.to_record() for r in self.rows), self.summary()]

    @classmethod
    def from_records(cls, records: Sequence[Mapping[str, Any]]) -> EvalReport:
        rows = [EvalRow.from_record(r) for r in records if r.get("schema") == ROW_SCHEMA]
        summaries = [r for r in records if r.get("schema") == SUMMARY_SCHEMA]
        method = summaries[-1]["method"] if summaries else "unknown"
        return cls.from_rows(method, rows)


def evaluate_sample(sample: Sample, cfg: RunConfig, run_index: int = 0) -> EvalRow:
    sample_cfg = cfg.with_changes(seed=cfg.seed + run_index)
    if sample.language != cfg.language:
        sample_cfg = sample_cfg.with_changes(language=sample.language)
    try:
        result = run(sample.question, sample.source(sample_cfg.counter), sample_cfg, world=sample.oracle)
    except ExtAgentsError as exc:
        log.warning("sample %s failed in run %d: %s", sample.id, run_index, exc)
        trace = getattr(exc, "partial_trace", None) or ()
        return EvalRow(run_index, sample.id, None, None, None, Decimal(0), len(trace), 0, error=str(exc))
    totals = result.totals
    f1 = token_f1(result.answer, sample.gold_answers, sample.language)
    return EvalRow(run_index, sample.id, result.answer, f1, result.outcome.status, totals.cost, totals.calls,
                   totals.critical_path_rounds, totals.input_tokens, totals.output_tokens)


def evaluate(dataset: Sequence[Sample], cfg: RunConfig, runs: int = 1, *, workers: int = 1) -> EvalReport:
    """Run ``cfg.method`` on every sample ``runs`` times; run ``r`` uses seed ``cfg.seed + r``."""
    if runs < 1:
        raise ConfigError("runs must be at least 1", field="runs")
    jobs = [(sample, r) for r in range(runs) for sample in dataset]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        rows = list(pool.map(lambda job: evaluate_sample(job[0], cfg, job[1]), jobs))
    return EvalReport.from_rows(cfg.method, rows)
