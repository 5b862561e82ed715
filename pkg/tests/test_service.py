from fastapi.testclient import TestClient

from extagents.service import create_app

from .worlds import two_fact_sample

client = TestClient(create_app())
SAMPLE = two_fact_sample(8, 2, 5, sid="svc").to_record()
CONFIG = {"input_length": "8k", "chunk_size": "2k"}


def test_health():
    assert client.get("/v1/health").json()["status"] == "ok"


def test_run_and_replay():
    reply = client.post("/v1/run", json={"config": CONFIG, "samples": [SAMPLE]})
    assert reply.status_code == 200
    body = reply.json()
    assert body["failed"] == 0
    (result,) = body["results"]
    assert result["answer"] == "code svc alpha"
    again = client.post("/v1/replay", json={"records": [result]}).json()["results"][0]
    assert again["totals"] == result["totals"]


def test_config_error_is_422_with_field():
    reply = client.post("/v1/run", json={"config": {"chunk_size": "256k"}, "samples": [SAMPLE]})
    assert reply.status_code == 422
    assert reply.json() == {"detail": "chunk_size must be < max_context", "field": "chunk_size"}


def test_evaluate_filter_bench():
    ev = client.post("/v1/evaluate", json={"config": CONFIG, "samples": [SAMPLE], "runs": 1}).json()
    assert ev["records"][-1]["mean_f1"] == 1.0
    flt = client.post("/v1/filter", json={"samples": [SAMPLE], "window": "4k"}).json()
    assert flt["audit"][0]["decision"] == "retained" and len(flt["kept"]) == 1
    bench = client.post("/v1/bench-latency", json={"config": {"chunk_size": "4k"}, "methods": ["direct"],
                                                   "grid": ["8k"]}).json()
    assert bench["rows"][0]["critical_path_rounds"] == 1


def test_request_validation():
    assert client.post("/v1/evaluate", json={"samples": [], "runs": 0}).status_code == 422
