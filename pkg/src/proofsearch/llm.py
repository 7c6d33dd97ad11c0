"""Guidance-model backends.

Three families: a remote chat-completions HTTP client, deterministic
scripted backends for tests, and record/replay around any backend. All of
them enforce the inference discipline of the search: temperature 0 and
exactly one completion per call.
"""

from __future__ import annotations

import json
import os
import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .prompts import LENGTH_CAP, NATURAL_STOP


class InfrastructureFailure(Exception):
    """Transport-level failure after exhausting retries; aborts the episode
    and is never counted as a proof failure."""


@dataclass
class CompletionRequest:
    system: str
    turns: Sequence[tuple] = ()  # (role, content) pairs, user turn last
    temperature: float = 0.0
    max_tokens: int | None = None
    metadata: dict = field(default_factory=dict)  # state_key, ordinal_at_state

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class Completion:
    text: str
    stop_reason: str  # NATURAL_STOP | LENGTH_CAP
    latency_seconds: float


class GuidanceBackend(ABC):
    @abstractmethod
    def complete(self, request: CompletionRequest) -> Completion:
        """Return exactly one completion for the request."""


class ScriptedBackend(GuidanceBackend):
    """Deterministic responses keyed by (state key, query ordinal at that
    state); unknown keys fall through to the default response."""

    def __init__(self, program: Mapping, default: str = ""):
        self.program = dict(program)
        self.default = default
        self._ordinals: dict = {}

    def complete(self, request: CompletionRequest) -> Completion:
        state_key = request.metadata.get("state_key")
        ordinal = self._ordinals.get(state_key, 0) + 1
        self._ordinals[state_key] = ordinal
        text = self.program.get((state_key, ordinal), self.default)
        return Completion(text, NATURAL_STOP, 0.0)


class SequenceBackend(GuidanceBackend):
    """Replies with a fixed response sequence, then with the default."""

    def __init__(self, responses: Sequence[str], default: str = ""):
        self.responses = list(responses)
        self.default = default
        self._cursor = 0

    def complete(self, request: CompletionRequest) -> Completion:
        if self._cursor < len(self.responses):
            text = self.responses[self._cursor]
            self._cursor += 1
        else:
            text = self.default
        return Completion(text, NATURAL_STOP, 0.0)


class RateLimiter:
    """Minimum spacing between requests, shared across episodes."""

    def __init__(self, requests_per_second: float | None):
        self._interval = 1.0 / requests_per_second if requests_per_second else 0.0
        self._lock = threading.Lock()
        self._last = 0.0

    def wait(self):
        if not self._interval:
            return
        with self._lock:
            now = time.monotonic()
            delay = self._last + self._interval - now
            if delay > 0:
                time.sleep(delay)
                now = time.monotonic()
            self._last = now


@dataclass
class HttpBackendConfig:
    base_url: str
    model: str
    api_key_env: str = "PROOFSEARCH_API_KEY"
    timeout_seconds: float = 120.0
    max_transport_retries: int = 3
    backoff_seconds: float = 1.0
    requests_per_second: float | None = None


class HttpBackend(GuidanceBackend):
    """Chat-completions-style HTTP client.

    POSTs {model, messages, temperature, max_tokens, n: 1} to
    <base_url>/chat/completions. Transport failures are retried with
    exponential backoff; retries are not inference calls and are invisible
    to the query budget.
    """

    def __init__(self, config: HttpBackendConfig, rate_limiter: RateLimiter | None = None):
        import requests  # deferred so offline use never needs it

        self._requests = requests
        self.config = config
        self.rate_limiter = rate_limiter or RateLimiter(config.requests_per_second)

    def complete(self, request: CompletionRequest) -> Completion:
        payload = {
            "model": self.config.model,
            "messages": [{"role": "system", "content": request.system}]
            + [{"role": role, "content": content} for role, content in request.turns],
            "temperature": request.temperature,
            "n": 1,
        }
        if request.max_tokens is not None:
            payload["max_tokens"] = request.max_tokens
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.config.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        start = time.monotonic()
        last_error: Exception | None = None
        for attempt in range(self.config.max_transport_retries + 1):
            if attempt:
                time.sleep(self.config.backoff_seconds * 2 ** (attempt - 1))
            self.rate_limiter.wait()
            try:
                response = self._requests.post(
                    url, json=payload, headers=headers, timeout=self.config.timeout_seconds
                )
                if response.status_code >= 500 or response.status_code == 429:
                    last_error = RuntimeError(f"server returned {response.status_code}")
                    continue
                response.raise_for_status()
                body = response.json()
                choice = body["choices"][0]
                stop = LENGTH_CAP if choice.get("finish_reason") == "length" else NATURAL_STOP
                return Completion(
                    choice["message"]["content"], stop, time.monotonic() - start
                )
            except (self._requests.RequestException, KeyError, ValueError) as exc:
                last_error = exc
        raise InfrastructureFailure(f"transport retries exhausted: {last_error}")


class RecordingBackend(GuidanceBackend):
    """Wraps a backend and appends every completion to a JSONL file."""

    def __init__(self, inner: GuidanceBackend, path: str | Path):
        self.inner = inner
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text("", encoding="utf-8")

    def complete(self, request: CompletionRequest) -> Completion:
        completion = self.inner.complete(request)
        record = {
            "text": completion.text,
            "stop_reason": completion.stop_reason,
            "latency_seconds": completion.latency_seconds,
        }
        with self.path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
        return completion


class ReplayBackend(GuidanceBackend):
    """Replays a recorded completion stream byte-identically, in order."""

    def __init__(self, path: str | Path):
        self.records = [
            json.loads(line)
            for line in Path(path).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        self._cursor = 0

    def complete(self, request: CompletionRequest) -> Completion:
        if self._cursor >= len(self.records):
            raise InfrastructureFailure("replay stream exhausted")
        record = self.records[self._cursor]
        self._cursor += 1
        return Completion(record["text"], record["stop_reason"], record["latency_seconds"])
