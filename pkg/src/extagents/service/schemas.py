"""Request and response bodies of the HTTP service."""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field


class RunRequest(BaseModel):
    config: dict[str, Any] = Field(default_factory=dict)
    samples: list[dict[str, Any]]
    include_trace: bool = True


class RunResponse(BaseModel):
    results: list[dict[str, Any]]
    failed: int


class EvaluateRequest(BaseModel):
    config: dict[str, Any] = Field(default_factory=dict)
    samples: list[dict[str, Any]]
    runs: int = Field(1, ge=1)


class EvaluateResponse(BaseModel):
    records: list[dict[str, Any]]
    failed: int


class FilterRequest(BaseModel):
    samples: list[dict[str, Any]]
    window: str | int = "8k"
    keep_over: str | int = "128k"
    judge: dict[str, Any] = Field(default_factory=dict)
    threshold: float = Field(0.5, ge=0.0, le=1.0)
    stride: Literal["window", "half"] = "window"
    task: str = "infbench"
    workers: int = Field(1, ge=1)


class FilterResponse(BaseModel):
    kept: list[dict[str, Any]]
    audit: list[dict[str, Any]]


class BenchRequest(BaseModel):
    config: dict[str, Any] = Field(default_factory=dict)
    methods: list[str]
    grid: list[str | int]


class BenchResponse(BaseModel):
    rows: list[dict[str, Any]]


class ReplayRequest(BaseModel):
    records: list[dict[str, Any]]
    cost: Optional[dict[str, Any]] = None


class ReplayResponse(BaseModel):
    results: list[dict[str, Any]]


class ErrorBody(BaseModel):
    detail: str
    field: Optional[str] = None
