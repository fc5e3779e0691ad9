"""Pluggable completion and embedding backends.

The HTTP clients speak the plain JSON protocols used by common open inference
servers: completions as ``{model, prompt, temperature, max_tokens} -> {text}``
(OpenAI-style ``choices`` responses are also accepted) and embeddings as
``{model, input: [...]} -> {vectors: [[...]]}`` (or ``data[*].embedding``).

Deterministic stub backends support offline runs and tests, and transcript
recording/replay makes any backend's outputs reproducible byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
import time
from collections import defaultdict, deque
from typing import Protocol, Sequence

import numpy as np
import requests

from . import jsonl

log = logging.getLogger(__name__)


class BackendError(Exception):
    """Backend unreachable or returned an unusable response after retries."""


class CompletionBackend(Protocol):
    def complete(self, prompt: str) -> str: ...


class EmbeddingBackend(Protocol):
    dim: int

    def embed(self, texts: Sequence[str]) -> list[list[float]]: ...


def _with_retries(fn, max_retries: int, what: str):
    delay = 0.5
    last_exc: Exception | None = None
    for attempt in range(max_retries + 1):
        try:
            return fn()
        except (requests.RequestException, BackendError, ValueError) as exc:
            last_exc = exc
            if attempt < max_retries:
                log.warning("%s failed (attempt %d/%d): %s", what, attempt + 1, max_retries + 1, exc)
                time.sleep(delay)
                delay *= 2
    raise BackendError(f"{what} failed after {max_retries + 1} attempts: {last_exc}")


class HttpCompletionBackend:
    """JSON-over-HTTP completion client with timeout, retries, and backoff."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        temperature: float = 0.7,
        max_tokens: int = 1024,
        timeout: float = 60.0,
        max_retries: int = 3,
        headers: dict[str, str] | None = None,
    ):
        if timeout <= 0:
            raise ValueError("timeout must be positive")
        if max_retries < 0:
            raise ValueError("max_retries must be non-negative")
        self.endpoint = endpoint
        self.model = model
        self.temperature = temperature
        self.max_tokens = max_tokens
        self.timeout = timeout
        self.max_retries = max_retries
        self.headers = headers or {}

    def complete(self, prompt: str) -> str:
        payload = {
            "model": self.model,
            "prompt": prompt,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }

        def call() -> str:
            resp = requests.post(self.endpoint, json=payload, timeout=self.timeout, headers=self.headers)
            if resp.status_code >= 500:
                raise BackendError(f"server error {resp.status_code}")
            resp.raise_for_status()
            return _extract_completion_text(resp.json())

        return _with_retries(call, self.max_retries, f"completion via {self.endpoint}")


def _extract_completion_text(body: dict) -> str:
    if "text" in body:
        return body["text"]
    choices = body.get("choices")
    if choices:
        first = choices[0]
        if "text" in first:
            return first["text"]
        message = first.get("message") or {}
        if "content" in message:
            return message["content"]
    raise ValueError(f"unrecognized completion response shape: {sorted(body)}")


class HttpEmbeddingBackend:
    """JSON-over-HTTP embedding client; batches are embedded in one request."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        dim: int,
        timeout: float = 60.0,
        max_retries: int = 3,
        headers: dict[str, str] | None = None,
    ):
        if timeout <= 0:
            raise ValueError("timeout must be positive")
        self.endpoint = endpoint
        self.model = model
        self.dim = dim
        self.timeout = timeout
        self.max_retries = max_retries
        self.headers = headers or {}

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        payload = {"model": self.model, "input": list(texts)}

        def call() -> list[list[float]]:
            resp = requests.post(self.endpoint, json=payload, timeout=self.timeout, headers=self.headers)
            if resp.status_code >= 500:
                raise BackendError(f"server error {resp.status_code}")
            resp.raise_for_status()
            vectors = _extract_vectors(resp.json())
            if len(vectors) != len(texts):
                raise ValueError(f"expected {len(texts)} vectors, got {len(vectors)}")
            return vectors

        return _with_retries(call, self.max_retries, f"embedding via {self.endpoint}")


def _extract_vectors(body: dict) -> list[list[float]]:
    if "vectors" in body:
        return body["vectors"]
    if "data" in body:
        return [row["embedding"] for row in body["data"]]
    raise ValueError(f"unrecognized embedding response shape: {sorted(body)}")


_STUB_WORDS = (
    "request", "handler", "cache", "retry", "queue", "parser", "config",
    "session", "token", "batch", "index", "worker", "schema", "client",
    "logger", "stream", "buffer", "router", "filter", "mapper",
)


class StubQaCompletionBackend:
    """Deterministic offline stand-in for a QA-generating model.

    Emits numbered question/answer lines derived from a hash of the prompt, so
    identical prompts always produce identical pairs.
    """

    def __init__(self, pairs: int = 3, seed: int = 0):
        self.pairs = pairs
        self.seed = seed

    def complete(self, prompt: str) -> str:
        digest = hashlib.sha256(f"{self.seed}:{prompt}".encode("utf-8")).hexdigest()
        rng = random.Random(int(digest[:16], 16))
        lines = []
        for i in range(1, self.pairs + 1):
            subject = rng.choice(_STUB_WORDS)
            detail = rng.choice(_STUB_WORDS)
            lines.append(f"Q{i}: How does the {subject} interact with the {detail} here?")
            lines.append(f"A{i}: The {subject} delegates to the {detail} and returns its result.")
        return "\n".join(lines)


class StubAnswerBackend:
    """Deterministic offline answerer; optional fixed delay for latency tests."""

    def __init__(self, delay_s: float = 0.0, seed: int = 0):
        self.delay_s = delay_s
        self.seed = seed

    def complete(self, prompt: str) -> str:
        if self.delay_s > 0:
            time.sleep(self.delay_s)
        digest = hashlib.sha256(f"{self.seed}:{prompt}".encode("utf-8")).hexdigest()
        return f"stub answer {digest[:12]}"


class ScriptedCompletionBackend:
    """Returns canned responses in order; raises when the script runs out."""

    def __init__(self, responses: Sequence[str]):
        self._queue = deque(responses)
        self.prompts: list[str] = []

    def complete(self, prompt: str) -> str:
        self.prompts.append(prompt)
        if not self._queue:
            raise BackendError("scripted backend exhausted")
        return self._queue.popleft()


class StubEmbeddingBackend:
    """Hash-to-sphere embeddings: each text maps to a fixed unit vector."""

    def __init__(self, dim: int = 64, seed: int = 0):
        if dim < 2:
            raise ValueError("dim must be at least 2")
        self.dim = dim
        self.seed = seed

    def _vector(self, text: str) -> list[float]:
        digest = hashlib.sha256(f"{self.seed}:{text}".encode("utf-8")).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))
        v = rng.standard_normal(self.dim)
        v = v / np.linalg.norm(v)
        return [float(x) for x in v.astype(np.float32)]

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        return [self._vector(t) for t in texts]


def _completion_key(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def _embedding_key(texts: Sequence[str]) -> str:
    return hashlib.sha256(json.dumps(list(texts), ensure_ascii=False).encode("utf-8")).hexdigest()


class TranscriptRecorder:
    """Wraps a backend and records every call for later replay.

    One recorder can sit in front of both a completion and an embedding
    backend; calls are keyed by a hash of the request and stored in call
    order, so replay is exact even when a prompt repeats with different
    responses.
    """

    def __init__(self, completion: CompletionBackend | None = None,
                 embedding: EmbeddingBackend | None = None):
        self._completion = completion
        self._embedding = embedding
        self.records: list[dict] = []

    @property
    def dim(self) -> int:
        if self._embedding is None:
            raise BackendError("no embedding backend behind recorder")
        return self._embedding.dim

    def complete(self, prompt: str) -> str:
        if self._completion is None:
            raise BackendError("no completion backend behind recorder")
        text = self._completion.complete(prompt)
        self.records.append({"kind": "completion", "key": _completion_key(prompt), "response": text})
        return text

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        if self._embedding is None:
            raise BackendError("no embedding backend behind recorder")
        vectors = self._embedding.embed(texts)
        self.records.append({"kind": "embedding", "key": _embedding_key(texts), "response": vectors})
        return vectors

    def save(self, path) -> None:
        jsonl.write_jsonl(path, self.records)


class TranscriptReplayBackend:
    """Serves recorded responses; a request with no matching record fails."""

    def __init__(self, path, dim: int | None = None):
        self._queues: dict[tuple[str, str], deque] = defaultdict(deque)
        self.dim = dim or 0
        for record in jsonl.read_jsonl(path):
            self._queues[(record["kind"], record["key"])].append(record["response"])
            if record["kind"] == "embedding" and dim is None and record["response"]:
                self.dim = len(record["response"][0])

    def _pop(self, kind: str, key: str):
        queue = self._queues.get((kind, key))
        if not queue:
            raise BackendError(f"transcript has no recorded {kind} response for this request")
        return queue.popleft()

    def complete(self, prompt: str) -> str:
        return self._pop("completion", _completion_key(prompt))

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        return self._pop("embedding", _embedding_key(texts))
