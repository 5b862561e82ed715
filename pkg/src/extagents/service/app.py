"""FastAPI application exposing runs, evaluation, filtering, latency and replay."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse

from .. import __version__
from ..backend.config import BackendConfig
from ..backend.cost import GPT4O_MINI, CostModel
from ..config import RunConfig
from ..datasets import Sample
from ..errors import ConfigError, ExtAgentsError
from ..knowledge import parse_token_count
from . import handlers
from .schemas import (
    BenchRequest,
    BenchResponse,
    ErrorBody,
    EvaluateRequest,
    EvaluateResponse,
    FilterRequest,
    FilterResponse,
    ReplayRequest,
    ReplayResponse,
    RunRequest,
    RunResponse,
)


def _samples(records: list[dict]) -> list[Sample]:
    samples = [Sample.from_record(r, line=i + 1) for i, r in enumerate(records)]
    if len({s.id for s in samples}) != len(samples):
        raise ConfigError("duplicate sample ids", field="id")
    return samples


def create_app() -> FastAPI:
    app = FastAPI(title="extagents", version=__version__)

    @app.exception_handler(ConfigError)
    async def config_error(_: Request, exc: ConfigError) -> JSONResponse:
        return JSONResponse(ErrorBody(detail=str(exc), field=exc.field).model_dump(), status_code=422)

    @app.exception_handler(ExtAgentsError)
    async def engine_error(_: Request, exc: ExtAgentsError) -> JSONResponse:
        return JSONResponse(ErrorBody(detail=str(exc)).model_dump(), status_code=500)

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/v1/run", response_model=RunResponse)
    async def run(body: RunRequest) -> RunResponse:
        cfg = RunConfig.from_mapping(body.config)
        results, failed = await run_in_threadpool(handlers.run_samples, _samples(body.samples), cfg,
                                                  include_trace=body.include_trace)
        return RunResponse(results=results, failed=failed)

    @app.post("/v1/evaluate", response_model=EvaluateResponse)
    async def evaluate(body: EvaluateRequest) -> EvaluateResponse:
        cfg = RunConfig.from_mapping(body.config)
        report = await run_in_threadpool(handlers.evaluate_samples, _samples(body.samples), cfg, body.runs)
        return EvaluateResponse(records=report.to_records(), failed=report.n_failed)

    @app.post("/v1/filter", response_model=FilterResponse)
    async def filter_(body: FilterRequest) -> FilterResponse:
        samples = _samples(body.samples)
        judge = BackendConfig.from_mapping(body.judge)
        result = await run_in_threadpool(
            handlers.filter_samples, samples, parse_token_count(body.window), judge,
            parse_token_count(body.keep_over), threshold=body.threshold, stride=body.stride, task=body.task,
            workers=body.workers)
        return FilterResponse(kept=[s.to_record() for s in result.kept],
                              audit=[a.to_record() for a in result.audit])

    @app.post("/v1/bench-latency", response_model=BenchResponse)
    async def bench(body: BenchRequest) -> BenchResponse:
        cfg = RunConfig.from_mapping(body.config)
        grid = [parse_token_count(g) for g in body.grid]
        rows = await run_in_threadpool(handlers.latency_table, cfg, body.methods, grid)
        return BenchResponse(rows=[r.to_record() for r in rows])

    @app.post("/v1/replay", response_model=ReplayResponse)
    def replay(body: ReplayRequest) -> ReplayResponse:
        cost = CostModel.from_record(body.cost) if body.cost else GPT4O_MINI
        return ReplayResponse(results=[r.to_record() for r in handlers.replay_records(body.records, cost)])

    return app


__all__ = ["create_app"]
