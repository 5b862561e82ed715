"""OpenAI-compatible chat-completions client with bounded retries."""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field

import httpx

from ..errors import ProtocolError, TransportError
from ..knowledge import DEFAULT_COUNTER, TokenCounter
from .base import Completion, check_budget
from .config import API_KEY_ENV, BackendConfig
from .cost import CompletionUsage

log = logging.getLogger(__name__)

_RETRY_STATUSES = frozenset({429}) | frozenset(range(500, 600))

_endpoint_slots: dict[tuple[str, int], threading.BoundedSemaphore] = {}
_slots_lock = threading.Lock()


def _slots(endpoint: str, cap: int) -> threading.BoundedSemaphore:
    with _slots_lock:
        key = (endpoint, cap)
        if key not in _endpoint_slots:
            _endpoint_slots[key] = threading.BoundedSemaphore(cap)
        return _endpoint_slots[key]


def request_body(config: BackendConfig, prompt: str) -> bytes:
    payload = {
        "model": config.model_name,
        "temperature": config.temperature,
        "messages": [{"role": "user", "content": prompt}],
    }
    return json.dumps(payload, ensure_ascii=False).encode("utf-8")


def parse_reply(raw: bytes, prompt_tokens: int, counter: TokenCounter) -> tuple[str, CompletionUsage]:
    try:
        data = json.loads(raw)
        text = data["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise ProtocolError(f"malformed chat-completion reply: {exc!r}") from exc
    if not isinstance(text, str):
        raise ProtocolError("reply content is not a string")
    usage = data.get("usage") or {}
    try:
        inp = int(usage.get("prompt_tokens", prompt_tokens))
        out = int(usage.get("completion_tokens", counter.count(text)))
    except (TypeError, ValueError) as exc:
        raise ProtocolError(f"malformed usage block: {usage!r}") from exc
    return text, CompletionUsage(inp, out)


@dataclass
class HttpBackend:
    config: BackendConfig
    counter: TokenCounter = DEFAULT_COUNTER
    sleep: callable = field(default=time.sleep, repr=False)  # type: ignore[valid-type]

    def __post_init__(self) -> None:
        self._url = self.config.endpoint.rstrip("/") + "/chat/completions"  # type: ignore[union-attr]
        self._client = httpx.Client(timeout=self.config.timeout)

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(API_KEY_ENV)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, prompt: str) -> Completion:
        prompt_tokens = check_budget(self.config, self.counter, prompt)
        body = request_body(self.config, prompt)
        retry = self.config.retry
        last_status: int | None = None
        last_error: str = ""
        started = time.perf_counter()
        for attempt in range(1, retry.max_attempts + 1):
            try:
                with _slots(self._url, self.config.max_concurrency):
                    response = self._client.post(self._url, content=body, headers=self._headers())
            except httpx.TransportError as exc:
                last_status, last_error = None, repr(exc)
            else:
                if response.status_code == 200:
                    text, usage = parse_reply(response.content, prompt_tokens, self.counter)
                    return Completion(text, usage, time.perf_counter() - started)
                last_status, last_error = response.status_code, response.text[:200]
                if response.status_code not in _RETRY_STATUSES:
                    raise TransportError(f"{self._url} answered {response.status_code}: {last_error}",
                                         status=response.status_code, attempts=attempt)
            if attempt < retry.max_attempts:
                delay = retry.delay(attempt)
                log.warning("attempt %d to %s failed (%s); retrying in %.2fs",
                            attempt, self._url, last_status or last_error, delay)
                self.sleep(delay)
        raise TransportError(f"{self._url} failed after {retry.max_attempts} attempts: {last_error}",
                             status=last_status, attempts=retry.max_attempts)

    def close(self) -> None:
        self._client.close()
