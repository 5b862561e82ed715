"""Command line: ``extagents <verb> [flags]``.

Work runs in-process unless ``--server URL`` is given, in which case the
verb is posted to a running ``extagents serve``.  Exit status is 0 on
success, 2 when some samples failed and 1 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .backend.cost import GPT4O_MINI, CostModel
from .config import DEFAULT_GRID, METHODS, RunConfig, load_run_config
from .datasets import dump_jsonl, dump_samples, load_samples
from .errors import ConfigError, ExtAgentsError
from .knowledge import format_token_count, parse_token_count

log = logging.getLogger("extagents")

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2


def _tokens(value: str) -> int:
    try:
        return parse_token_count(value)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _token_list(value: str) -> list[int]:
    return [_tokens(v) for v in value.split(",") if v.strip()]


def _config_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("run configuration (overrides the config file)")
    g.add_argument("--config", type=Path, help="YAML config file")
    g.add_argument("--method", choices=METHODS)
    g.add_argument("--input-length", type=_tokens, metavar="TOKENS", help="input budget, e.g. 128k")
    g.add_argument("--chunk-size", type=_tokens, metavar="TOKENS")
    g.add_argument("--max-timesteps", type=int, metavar="T")
    g.add_argument("--schedule-cap", type=int, metavar="S")
    g.add_argument("--interleaved", action=argparse.BooleanOptionalAction, default=None)
    g.add_argument("--ranking-mode", choices=("llm_rated", "retrieval_priority"))
    g.add_argument("--language", choices=("en", "zh"))
    g.add_argument("--task", choices=("infbench", "hotpotqa"))
    g.add_argument("--seed", type=int)
    g.add_argument("--workers", type=int, help="agent worker pool size")
    g.add_argument("--backend", choices=("oracle", "http"), help="backend kind for every role")
    g.add_argument("--model", help="model name for every role")
    g.add_argument("--endpoint", help="chat-completions base URL for every role")
    g.add_argument("--max-context", type=_tokens, metavar="TOKENS", help="context window L for every role")


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    backends = {k: v for k, v in (("kind", args.backend), ("model_name", args.model),
                                  ("endpoint", args.endpoint), ("max_context", args.max_context))
                if v is not None}
    flat = {
        "method": args.method,
        "input_length": args.input_length,
        "chunk_size": args.chunk_size,
        "max_timesteps": args.max_timesteps,
        "schedule_cap": args.schedule_cap,
        "interleaved": args.interleaved,
        "ranking_mode": args.ranking_mode,
        "language": args.language,
        "task": args.task,
        "seed": args.seed,
        "workers": args.workers,
        "backends": backends or None,
    }
    return {k: v for k, v in flat.items() if v is not None}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="extagents", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default="WARNING")
    parser.add_argument("--server", metavar="URL", help="post the verb to a running service")
    verbs = parser.add_subparsers(dest="verb", required=True)

    p = verbs.add_parser("run", help="answer every sample of a dataset")
    _config_flags(p)
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True, help="result records (JSON lines)")
    p.add_argument("--no-trace", dest="trace", action="store_false", help="omit traces from results")

    p = verbs.add_parser("evaluate", help="score a method on a dataset")
    _config_flags(p)
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True, help="report rows plus a summary record")
    p.add_argument("--runs", type=int, default=1)

    p = verbs.add_parser("filter", help="drop samples answerable from one window")
    _config_flags(p)
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True, help="kept samples")
    p.add_argument("--audit", type=Path, required=True, help="audit log (JSON lines)")
    p.add_argument("--window", type=_tokens, default=_tokens("8k"))
    p.add_argument("--keep-over", type=_tokens, default=_tokens("128k"))
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--stride", choices=("window", "half"), default="window")

    p = verbs.add_parser("bench-latency", help="critical path and modeled latency over a grid")
    _config_flags(p)
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--grid", type=_token_list, default=list(DEFAULT_GRID))
    p.add_argument("--output", type=Path)

    p = verbs.add_parser("replay", help="recompute totals and cost from stored traces")
    p.add_argument("--trace", type=Path, required=True, help="result file or trace file")
    p.add_argument("--input-price", help="dollars per 1M input tokens")
    p.add_argument("--output-price", help="dollars per 1M output tokens")
    p.add_argument("--output", type=Path)

    p = verbs.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    p = verbs.add_parser("synth", help="write a synthetic oracle dataset")
    p.add_argument("--suite", choices=("scaling", "chain", "filter", "bench"), required=True)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--input-length", type=_tokens, default=_tokens("128k"), help="bench suite only")
    p.add_argument("--output", type=Path, required=True)
    return parser


class _Remote:
    def __init__(self, url: str) -> None:
        self.url = url.rstrip("/")

    def post(self, path: str, body: dict[str, Any]) -> dict[str, Any]:
        import httpx

        try:
            reply = httpx.post(f"{self.url}/v1/{path}", json=body, timeout=None)
        except httpx.HTTPError as exc:
            raise ConfigError(f"cannot reach {self.url}: {exc}", field="server") from exc
        if reply.status_code == 422:
            detail = reply.json()
            if isinstance(detail.get("detail"), list):  # request validation
                raise ConfigError(json.dumps(detail["detail"]), field="request")
            raise ConfigError(detail.get("detail", "rejected"), field=detail.get("field"))
        if reply.status_code != 200:
            raise ExtAgentsError(f"server answered {reply.status_code}: {reply.text[:200]}")
        return reply.json()


def _load_records(path: Path) -> list[dict[str, Any]]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", field="trace") from exc
    try:
        data = json.loads(text)
        return data if isinstance(data, list) else [data]
    except json.JSONDecodeError:
        pass
    try:
        return [json.loads(line) for line in text.splitlines() if line.strip()]
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: neither JSON nor JSON lines: {exc.msg}", field="trace") from exc


def _cmd_run(args: argparse.Namespace, cfg: RunConfig) -> int:
    samples = load_samples(args.dataset)
    if args.server:
        reply = _Remote(args.server).post("run", {"config": cfg.to_record(), "include_trace": args.trace,
                                                  "samples": [s.to_record() for s in samples]})
        records, failed = reply["results"], reply["failed"]
    else:
        from .service.handlers import run_samples

        records, failed = run_samples(samples, cfg, include_trace=args.trace)
    dump_jsonl(records, args.output)
    print(f"{len(records) - failed}/{len(records)} samples answered; results in {args.output}")
    return EXIT_PARTIAL if failed else EXIT_OK


def _cmd_evaluate(args: argparse.Namespace, cfg: RunConfig) -> int:
    samples = load_samples(args.dataset)
    if args.server:
        reply = _Remote(args.server).post("evaluate", {"config": cfg.to_record(), "runs": args.runs,
                                                       "samples": [s.to_record() for s in samples]})
        records, failed = reply["records"], reply["failed"]
    else:
        from .service.handlers import evaluate_samples

        report = evaluate_samples(samples, cfg, args.runs)
        records, failed = report.to_records(), report.n_failed
    dump_jsonl(records, args.output)
    summary = records[-1]
    mean = summary["mean_f1"]
    print(f"{cfg.method}: mean F1 {mean:.4f}" if mean is not None else f"{cfg.method}: no successful samples",
          f"over {summary['n_runs']} run(s), {failed} failure(s), cost ${summary['cost']}")
    return EXIT_PARTIAL if failed else EXIT_OK


def _cmd_filter(args: argparse.Namespace, cfg: RunConfig) -> int:
    samples = load_samples(args.dataset)
    judge = cfg.role_backends.reasoning
    if args.server:
        reply = _Remote(args.server).post("filter", {
            "samples": [s.to_record() for s in samples], "window": args.window, "keep_over": args.keep_over,
            "judge": judge.to_record(), "threshold": args.threshold, "stride": args.stride, "task": cfg.task,
            "workers": cfg.workers})
        kept, audit = reply["kept"], reply["audit"]
    else:
        from .service.handlers import filter_samples

        result = filter_samples(samples, args.window, judge, args.keep_over, threshold=args.threshold,
                                stride=args.stride, task=cfg.task, workers=cfg.workers)
        kept = [s.to_record() for s in result.kept]
        audit = [a.to_record() for a in result.audit]
    dump_jsonl(kept, args.output)
    dump_jsonl(audit, args.audit)
    undetermined = sum(a["decision"] == "undetermined" for a in audit)
    print(f"kept {len(kept)}/{len(samples)} samples at window {format_token_count(args.window)}"
          f" ({undetermined} undetermined)")
    return EXIT_PARTIAL if undetermined else EXIT_OK


def _cmd_bench(args: argparse.Namespace, cfg: RunConfig) -> int:
    from .latency import LatencyRow, format_table

    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}", field="methods")
    if args.server:
        reply = _Remote(args.server).post("bench-latency", {"config": cfg.to_record(), "methods": methods,
                                                            "grid": args.grid})
        records = reply["rows"]
    else:
        from .service.handlers import latency_table

        records = [r.to_record() for r in latency_table(cfg, methods, args.grid)]
    rows = [LatencyRow(r["method"], parse_token_count(r["input_length"]), r["n_chunks"], r["calls"],
                       r["critical_path_rounds"], r["modeled_latency"]) for r in records]
    print(format_table(rows))
    if args.output:
        dump_jsonl(records, args.output)
    return EXIT_OK


def _cmd_replay(args: argparse.Namespace) -> int:
    cost = GPT4O_MINI
    if args.input_price is not None or args.output_price is not None:
        base = GPT4O_MINI.to_record()
        cost = CostModel.from_record({
            "input_price_per_million": args.input_price or base["input_price_per_million"],
            "output_price_per_million": args.output_price or base["output_price_per_million"]})
    records = _load_records(args.trace)
    if args.server:
        results = _Remote(args.server).post("replay", {"records": records, "cost": cost.to_record()})["results"]
    else:
        from .service.handlers import replay_records

        results = [r.to_record() for r in replay_records(records, cost)]
    if args.output:
        dump_jsonl(results, args.output)
    else:
        for r in results:
            print(json.dumps(r, ensure_ascii=False, sort_keys=True))
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    from . import synthetic

    if args.suite == "scaling":
        samples = synthetic.scaling_family(args.n, seed=args.seed)
    elif args.suite == "chain":
        samples = synthetic.chain_adversarial_suite(args.n, seed=args.seed)
    elif args.suite == "filter":
        samples = [c.sample for c in synthetic.filter_suite(args.seed)]
    else:
        from .latency import bench_sample

        samples = [bench_sample(args.input_length, args.seed)]
    dump_samples(samples, args.output)
    print(f"wrote {len(samples)} samples to {args.output}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.verb == "replay":
            return _cmd_replay(args)
        if args.verb == "serve":
            return _cmd_serve(args)
        if args.verb == "synth":
            return _cmd_synth(args)
        cfg = load_run_config(args.config, _overrides(args))
        command = {"run": _cmd_run, "evaluate": _cmd_evaluate, "filter": _cmd_filter,
                   "bench-latency": _cmd_bench}[args.verb]
        return command(args, cfg)
    except ConfigError as exc:
        where = f" [field: {exc.field}]" if exc.field else ""
        print(f"extagents: error: {exc}{where}", file=sys.stderr)
        return EXIT_CONFIG
    except ExtAgentsError as exc:
        print(f"extagents: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
