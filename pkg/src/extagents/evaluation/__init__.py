"""Metrics, retrieval, benchmark filtering and evaluation reports."""

from .bm25 import BM25Index, bm25_retrieve
from .filtering import AUDIT_SCHEMA, AuditEntry, FilterResult, filter_benchmark, windows
from .harness import EvalReport, EvalRow, RunAggregate, evaluate, evaluate_sample
from .metrics import normalize_tokens, token_f1

__all__ = [
    "AUDIT_SCHEMA",
    "AuditEntry",
    "BM25Index",
    "EvalReport",
    "EvalRow",
    "FilterResult",
    "RunAggregate",
    "bm25_retrieve",
    "evaluate",
    "evaluate_sample",
    "filter_benchmark",
    "normalize_tokens",
    "token_f1",
    "windows",
]
