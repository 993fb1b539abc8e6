"""Chat-completion client with retries, session recording and offline replay.

Requests use the common chat-completion JSON shape (``model``, ``messages``
and sampling parameters) posted to ``{base_url}/chat/completions``; the reply
text is ``choices[0].message.content``.

Session recordings are JSON lines, one per completed call::

    {"seq": 0, "request_hash": "<sha256 hex>", "response": "...", "latency": 0.42}

``request_hash`` is the SHA-256 of the canonical (sorted-key, compact) JSON
request body, so a replay matches requests by content. Repeated identical
requests are answered in recorded order.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from collections import defaultdict, deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Callable, Sequence

import httpx

from rewardshift.core import ConfigError

Messages = Sequence[dict[str, str]]

_RETRY_STATUS = {408, 409, 425, 429, 500, 502, 503, 504}


class LLMTransportError(RuntimeError):
    """A completion could not be obtained (retries exhausted, bad reply, or no recording)."""


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str = "http://localhost:8000/v1"
    model: str = "local-model"
    temperature: float = 0.7
    top_p: float = 0.1
    repetition_penalty: float = 1.18
    top_k: int = 40
    max_tokens: int = 512
    timeout: float = 60.0
    max_retries: int = 3
    backoff: float = 0.5
    auth_env: str | None = "LLM_API_KEY"

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EndpointConfig":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown endpoint keys {unknown}")
        return cls(**data)

    def payload(self, messages: Messages) -> dict[str, Any]:
        return {
            "model": self.model,
            "messages": [dict(m) for m in messages],
            "temperature": self.temperature,
            "top_p": self.top_p,
            "top_k": self.top_k,
            "repetition_penalty": self.repetition_penalty,
            "max_tokens": self.max_tokens,
        }

    def headers(self) -> dict[str, str]:
        token = os.environ.get(self.auth_env) if self.auth_env else None
        return {"Authorization": f"Bearer {token}"} if token else {}


def request_hash(payload: dict[str, Any]) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class SessionRecorder:
    """Appends completed calls to a JSONL recording."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._seq = 0

    def write(self, req_hash: str, response: str, latency: float) -> None:
        with self._lock:
            rec = {"seq": self._seq, "request_hash": req_hash, "response": response, "latency": latency}
            self._seq += 1
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


class ChatClient:
    """Live client. ``transport`` lets tests substitute ``httpx.MockTransport``."""

    def __init__(
        self,
        endpoint: EndpointConfig,
        transport: httpx.BaseTransport | None = None,
        recorder: SessionRecorder | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.endpoint = endpoint
        self.recorder = recorder
        self.sleep = sleep
        self.latencies: list[float] = []
        self._http = httpx.Client(
            base_url=endpoint.base_url, timeout=endpoint.timeout, transport=transport
        )

    def close(self) -> None:
        self._http.close()

    def _post(self, payload: dict[str, Any]) -> str:
        ep = self.endpoint
        last: Exception | None = None
        for attempt in range(ep.max_retries + 1):
            if attempt:
                self.sleep(ep.backoff * 2 ** (attempt - 1))
            try:
                resp = self._http.post("/chat/completions", json=payload, headers=ep.headers())
            except httpx.TransportError as exc:
                last = exc
                continue
            if resp.status_code in _RETRY_STATUS:
                last = LLMTransportError(f"HTTP {resp.status_code}")
                continue
            if resp.status_code >= 400:
                raise LLMTransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise LLMTransportError(f"malformed completion body: {exc}") from exc
        raise LLMTransportError(f"gave up after {ep.max_retries + 1} attempts: {last}")

    def complete(self, messages: Messages) -> str:
        payload = self.endpoint.payload(messages)
        t0 = time.perf_counter()
        text = self._post(payload)
        latency = time.perf_counter() - t0
        self.latencies.append(latency)
        if self.recorder is not None:
            self.recorder.write(request_hash(payload), text, latency)
        return text

    def complete_many(self, batch: Sequence[Messages], max_workers: int = 4) -> list[str | LLMTransportError]:
        """Concurrent completions, returned in request order; failures are returned, not raised."""

        def one(msgs: Messages) -> str | LLMTransportError:
            try:
                return self.complete(msgs)
            except LLMTransportError as exc:
                return exc

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(one, batch))


class ReplayClient:
    """Answers requests from a recording; unmatched requests raise :class:`LLMTransportError`."""

    def __init__(self, endpoint: EndpointConfig, path: str | Path) -> None:
        self.endpoint = endpoint
        self.latencies: list[float] = []
        self._queues: dict[str, deque[tuple[str, float]]] = defaultdict(deque)
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        records = [json.loads(ln) for ln in lines if ln.strip()]
        for rec in sorted(records, key=lambda r: r["seq"]):
            self._queues[rec["request_hash"]].append((rec["response"], rec["latency"]))

    def complete(self, messages: Messages) -> str:
        key = request_hash(self.endpoint.payload(messages))
        queue = self._queues.get(key)
        if not queue:
            raise LLMTransportError(f"no recorded response for request {key[:12]}")
        text, latency = queue.popleft()
        self.latencies.append(latency)
        return text

    def remaining(self) -> int:
        return sum(len(q) for q in self._queues.values())


def request_verdict(endpoint: EndpointConfig, messages: Messages, client: ChatClient | None = None) -> str:
    """One chat-completion round trip; raises :class:`LLMTransportError` when retries run out."""
    own = client is None
    client = client or ChatClient(endpoint)
    try:
        return client.complete(messages)
    finally:
        if own:
            client.close()


def endpoint_to_dict(endpoint: EndpointConfig) -> dict[str, Any]:
    return asdict(endpoint)
