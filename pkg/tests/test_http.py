import json

import pytest

from extagents.backend.config import BackendConfig, RetryPolicy
from extagents.backend.cost import CompletionUsage
from extagents.backend.http import HttpBackend, parse_reply, request_body
from extagents.errors import BudgetError, ConfigError, ProtocolError, TransportError
from extagents.knowledge import TokenCounter

from .stub_server import StubServer

# frozen by hand from the chat-completions wire format
GOLDEN_REQUEST = ('{"model": "gpt-4o-mini", "temperature": 0.0, "messages": '
                  '[{"role": "user", "content": "Question: 长度?\\nAnswer"}]}').encode("utf-8")
GOLDEN_REPLY = (b'{"id": "cmpl-1", "object": "chat.completion", "choices": [{"index": 0, '
                b'"message": {"role": "assistant", "content": "Score: 87"}, "finish_reason": "stop"}], '
                b'"usage": {"prompt_tokens": 12, "completion_tokens": 3, "total_tokens": 15}}')
PROMPT = "Question: 长度?\nAnswer"


def config(url, **kw):
    return BackendConfig(kind="http", model_name="gpt-4o-mini", endpoint=url,
                         retry=RetryPolicy(max_attempts=3, backoff_initial=1.0, backoff_factor=2.0), **kw)


def test_request_body_golden():
    assert request_body(config("http://x"), PROMPT) == GOLDEN_REQUEST


def test_round_trip_against_stub(monkeypatch):
    monkeypatch.setenv("EXTAGENTS_API_KEY", "sk-test")
    with StubServer([(200, GOLDEN_REPLY)]) as stub:
        backend = HttpBackend(config(stub.url))
        reply = backend.complete(PROMPT)
        backend.close()
    assert reply.text == "Score: 87"
    assert reply.usage == CompletionUsage(12, 3)
    (request,) = stub.requests
    assert request["path"] == "/v1/chat/completions"
    assert request["body"] == GOLDEN_REQUEST
    assert request["headers"]["Authorization"] == "Bearer sk-test"
    assert request["headers"]["Content-Type"] == "application/json"


def test_usage_falls_back_to_counter():
    raw = json.dumps({"choices": [{"message": {"content": "abcdefgh"}}]}).encode()
    text, usage = parse_reply(raw, 7, TokenCounter())
    assert text == "abcdefgh" and usage == CompletionUsage(7, 2)


@pytest.mark.parametrize("raw", [b"not json", b"{}", b'{"choices": []}', b'{"choices": [{"message": {"content": 5}}]}'])
def test_malformed_reply(raw):
    with pytest.raises(ProtocolError):
        parse_reply(raw, 1, TokenCounter())


def test_retries_transient_statuses():
    delays = []
    with StubServer([(503, b"busy"), (429, b"slow down"), (200, GOLDEN_REPLY)]) as stub:
        reply = HttpBackend(config(stub.url), sleep=delays.append).complete(PROMPT)
    assert reply.text == "Score: 87"
    assert len(stub.requests) == 3
    assert delays == [1.0, 2.0]


def test_gives_up_after_max_attempts():
    delays = []
    with StubServer([(500, b"down")]) as stub:
        with pytest.raises(TransportError) as exc:
            HttpBackend(config(stub.url), sleep=delays.append).complete(PROMPT)
    assert exc.value.status == 500 and exc.value.attempts == 3
    assert len(stub.requests) == 3 and delays == [1.0, 2.0]


def test_client_errors_are_not_retried():
    with StubServer([(400, b"bad request")]) as stub:
        with pytest.raises(TransportError) as exc:
            HttpBackend(config(stub.url), sleep=lambda s: None).complete(PROMPT)
    assert exc.value.status == 400 and exc.value.attempts == 1
    assert len(stub.requests) == 1


def test_budget_rejected_before_any_socket_write(no_network):
    backend = HttpBackend(config("http://127.0.0.1:9/v1", max_context=16))
    with pytest.raises(BudgetError) as exc:
        backend.complete("x" * 64)
    assert exc.value.tokens == 16 and exc.value.limit == 16
    assert no_network == []


def test_budget_rejection_leaves_stub_untouched():
    with StubServer([(200, GOLDEN_REPLY)]) as stub:
        with pytest.raises(BudgetError):
            HttpBackend(config(stub.url, max_context=8)).complete("y" * 100)
    assert stub.requests == []


def test_http_needs_endpoint():
    with pytest.raises(ConfigError):
        BackendConfig(kind="http")
