import json

import httpx
import pytest
import yaml
from fastapi.testclient import TestClient

from extagents import cli
from extagents.config import load_run_config
from extagents.datasets import dump_samples
from extagents.service import create_app

from .worlds import two_fact_sample, unsolvable


@pytest.fixture
def dataset(tmp_path):
    path = tmp_path / "data.jsonl"
    dump_samples([two_fact_sample(16, 1, 9, sid="a"), unsolvable(two_fact_sample(16, 2, 3, sid="b"))], path)
    return path


def test_run_writes_results(tmp_path, dataset, no_network):
    out = tmp_path / "results.jsonl"
    code = cli.main(["run", "--dataset", str(dataset), "--output", str(out), "--input-length", "16k",
                     "--chunk-size", "4k", "--backend", "oracle", "--max-timesteps", "2"])
    assert code == 0
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert [r["sample_id"] for r in rows] == ["a", "b"]
    assert rows[0]["schema"] == "extagents.result/v1" and rows[0]["trace"]["schema"] == "extagents.trace/v1"
    assert rows[1]["outcome"]["status"] == "forced"
    assert no_network == []


def test_chain_critical_path_through_cli(tmp_path, dataset):
    out = tmp_path / "coa.jsonl"
    assert cli.main(["run", "--dataset", str(dataset), "--output", str(out), "--method", "chain_of_agents",
                     "--input-length", "16k", "--chunk-size", "4k"]) == 0
    row = json.loads(out.read_text().splitlines()[0])
    assert row["n_chunks"] == 4 and row["totals"]["critical_path_rounds"] == 5


def test_chunk_size_violation_exits_1(tmp_path, dataset, capsys):
    code = cli.main(["run", "--dataset", str(dataset), "--output", str(tmp_path / "x"), "--chunk-size", "256k"])
    assert code == 1
    assert "chunk_size must be < max_context" in capsys.readouterr().err
    assert not (tmp_path / "x").exists()


def test_unreadable_dataset_exits_1(tmp_path, capsys):
    code = cli.main(["run", "--dataset", str(tmp_path / "none.jsonl"), "--output", str(tmp_path / "x")])
    assert code == 1 and "dataset" in capsys.readouterr().err


def test_schema_violation_names_field(tmp_path, capsys):
    path = tmp_path / "bad.jsonl"
    path.write_text(json.dumps({"id": "a", "question": "q", "context": "c"}) + "\n")
    assert cli.main(["run", "--dataset", str(path), "--output", str(tmp_path / "x")]) == 1
    assert "answers" in capsys.readouterr().err


def test_oracle_without_world_is_config_error(tmp_path, capsys):
    path = tmp_path / "plain.jsonl"
    path.write_text(json.dumps({"id": "a", "question": "q", "answers": ["x"], "context": "c"}) + "\n")
    assert cli.main(["run", "--dataset", str(path), "--output", str(tmp_path / "x")]) == 1
    assert "field: oracle" in capsys.readouterr().err


def test_partial_failure_exits_2(tmp_path, dataset):
    out = tmp_path / "r.jsonl"
    config = tmp_path / "c.yaml"
    # the rating window is too small for any rating prompt, so every llm_rated run aborts
    config.write_text(yaml.safe_dump({"backends": {"rating": {"max_context": 40}}}))
    code = cli.main(["run", "--dataset", str(dataset), "--output", str(out), "--config", str(config),
                     "--input-length", "16k", "--chunk-size", "4k"])
    assert code == 2
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert all("error" in r for r in rows)


def test_flag_precedence(tmp_path):
    config = tmp_path / "c.yaml"
    config.write_text(yaml.safe_dump({"chunk_size": "16k", "max_timesteps": 3, "schedule_cap": 2}))
    args = cli.build_parser().parse_args(["run", "--dataset", "d", "--output", "o", "--config", str(config),
                                          "--max-timesteps", "9", "--interleaved", "--ranking-mode",
                                          "retrieval_priority"])
    cfg = load_run_config(args.config, cli._overrides(args))
    assert (cfg.T, cfg.chunk_size, cfg.S, cfg.input_budget) == (9, 16384, 2, 131072)
    assert cfg.interleaved


def test_evaluate_filter_bench_replay(tmp_path, dataset, capsys):
    report = tmp_path / "report.jsonl"
    assert cli.main(["evaluate", "--dataset", str(dataset), "--output", str(report), "--input-length", "16k",
                     "--chunk-size", "4k", "--max-timesteps", "2", "--runs", "2"]) == 0
    summary = json.loads(report.read_text().splitlines()[-1])
    assert summary["schema"] == "extagents.report/v1" and summary["mean_f1"] == 0.5 and summary["median_of_runs"]

    kept, audit = tmp_path / "kept.jsonl", tmp_path / "audit.jsonl"
    assert cli.main(["filter", "--dataset", str(dataset), "--output", str(kept), "--audit", str(audit),
                     "--window", "4k"]) == 0
    entries = [json.loads(line) for line in audit.read_text().splitlines()]
    assert [e["decision"] for e in entries] == ["retained", "retained"]

    results = tmp_path / "r.jsonl"
    cli.main(["run", "--dataset", str(dataset), "--output", str(results), "--input-length", "16k",
              "--chunk-size", "4k", "--max-timesteps", "2"])
    capsys.readouterr()
    assert cli.main(["replay", "--trace", str(results)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2 and json.loads(lines[0])["schema"] == "extagents.replay/v1"

    assert cli.main(["bench-latency", "--methods", "direct", "--grid", "8k,16k"]) == 0
    assert "direct" in capsys.readouterr().out


def test_replay_schema_mismatch_exits_1(tmp_path):
    path = tmp_path / "t.json"
    path.write_text(json.dumps({"schema": "extagents.trace/v0", "events": []}))
    assert cli.main(["replay", "--trace", str(path)]) == 1


def test_synth(tmp_path):
    out = tmp_path / "s.jsonl"
    assert cli.main(["synth", "--suite", "scaling", "--n", "2", "--output", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 2


def test_missing_required_flag_exits_before_work():
    with pytest.raises(SystemExit) as exc:
        cli.main(["run", "--dataset", "d.jsonl"])
    assert exc.value.code == 2  # argparse usage error


def test_thin_client_mode(tmp_path, dataset, monkeypatch):
    client = TestClient(create_app())
    seen = []

    def post(url, json=None, timeout=None):
        seen.append(url)
        return client.post(url.replace("http://service", ""), json=json)

    monkeypatch.setattr(httpx, "post", post)
    local, remote = tmp_path / "local.jsonl", tmp_path / "remote.jsonl"
    flags = ["--input-length", "16k", "--chunk-size", "4k", "--max-timesteps", "2"]
    assert cli.main(["run", "--dataset", str(dataset), "--output", str(local), *flags]) == 0
    assert cli.main(["--server", "http://service", "run", "--dataset", str(dataset), "--output", str(remote),
                     *flags]) == 0
    assert local.read_bytes() == remote.read_bytes()
    assert seen == ["http://service/v1/run"]
    assert cli.main(["--server", "http://service", "run", "--dataset", str(dataset), "--output",
                     str(remote), "--chunk-size", "256k"]) == 1
