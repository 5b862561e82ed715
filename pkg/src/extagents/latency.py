"""Critical-path rounds and modeled wall time across input lengths."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

from .config import DEFAULT_GRID, RunConfig
from .knowledge import format_token_count
from .orchestrator import run
from .synthetic import BLOCK_TOKENS, Placement, document_sample

LATENCY_SCHEMA = "extagents.latency/v1"


@dataclass(frozen=True)
class LatencyRow:
    method: str
    input_length: int
    n_chunks: int
    calls: int
    critical_path_rounds: int
    modeled_latency: float

    def to_record(self) -> dict[str, Any]:
        return {
            "schema": LATENCY_SCHEMA,
            "method": self.method,
            "input_length": format_token_count(self.input_length),
            "n_chunks": self.n_chunks,
            "calls": self.calls,
            "critical_path_rounds": self.critical_path_rounds,
            "modeled_latency": round(self.modeled_latency, 6),
        }


def bench_sample(input_length: int, seed: int = 0):
    """Both required facts in the first block, so the top message answers at once."""
    n_blocks = max(2, -(-input_length // BLOCK_TOKENS))
    return document_sample(f"bench{input_length}", n_blocks, [Placement("f0", 0), Placement("f1", 1)], seed)


def bench_latency(cfg: RunConfig, methods: Sequence[str], grid: Sequence[int] = DEFAULT_GRID) -> list[LatencyRow]:
    rows = []
    for method in methods:
        for length in grid:
            sample = bench_sample(length, cfg.seed)
            run_cfg = cfg.with_changes(method=method, input_budget=length)
            result = run(sample.question, sample.source(run_cfg.counter), run_cfg, world=sample.oracle)
            t = result.totals
            rows.append(LatencyRow(method, length, result.n_chunks, t.calls, t.critical_path_rounds,
                                   t.modeled_latency))
    return rows


def format_table(rows: Sequence[LatencyRow]) -> str:
    header = f"{'method':<16}{'input':>8}{'chunks':>8}{'calls':>8}{'rounds':>8}{'latency_s':>12}"
    lines = [header]
    for r in rows:
        lines.append(f"{r.method:<16}{format_token_count(r.input_length):>8}{r.n_chunks:>8}{r.calls:>8}"
                     f"{r.critical_path_rounds:>8}{r.modeled_latency:>12.3f}")
    return "\n".join(lines)
