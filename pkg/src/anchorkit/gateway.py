"""Inference prompt assembly and batched execution.

Three prompt modes are supported: anchor-keyed prompts ("kant") that carry
only retrieved anchor keys, retrieval-augmented prompts ("rag") that inline
retrieved chunk text under a context-window budget, and bare "base" prompts.
Batches are executed against a completion backend with per-query isolation
and per-batch wall-clock accounting, so token and latency efficiency can be
compared from the result log alone.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

from .backends import BackendError, CompletionBackend
from .ingest import CodeChunk, count_tokens

log = logging.getLogger(__name__)

KEY_TOKEN = "[KEY]"
Q_TOKEN = "[Q]"
KEY_JOINER = "; "

MODE_KANT = "kant"
MODE_RAG = "rag"
MODE_BASE = "base"
MODES = (MODE_KANT, MODE_RAG, MODE_BASE)

DEFAULT_WINDOW = 4000
DEFAULT_BATCH_SIZE = 16

Tokenizer = Callable[[str], int]


@dataclass(frozen=True)
class PromptBundle:
    mode: str
    text: str
    prompt_tokens: int
    query_id: str


@dataclass(frozen=True)
class InferenceResult:
    query_id: str
    mode: str
    answer_text: str
    latency_ms: float
    prompt_tokens: int
    completion_tokens: int
    batch_index: int
    batch_latency_ms: float
    error: str | None = None


@dataclass(frozen=True)
class EfficiencyReport:
    query_count: int
    kant_mean_batch_latency_ms: float
    rag_mean_batch_latency_ms: float
    kant_mean_prompt_tokens: float
    rag_mean_prompt_tokens: float
    latency_reduction_pct: float
    token_reduction_pct: float


def build_kant_prompt(
    query: str,
    anchor_keys: Sequence[str],
    query_id: str = "",
    tokenizer: Tokenizer = count_tokens,
) -> PromptBundle:
    """Anchor-keyed prompt: retrieved keys only, no chunk text."""
    if not anchor_keys:
        raise ValueError("at least one anchor key is required")
    text = f"{KEY_TOKEN} {KEY_JOINER.join(anchor_keys)} {Q_TOKEN} {query}"
    return PromptBundle(mode=MODE_KANT, text=text, prompt_tokens=tokenizer(text), query_id=query_id)


def parse_kant_prompt(text: str) -> tuple[list[str], str]:
    """Inverse of the anchor-keyed grammar: recover (keys, query)."""
    prefix = f"{KEY_TOKEN} "
    sep = f" {Q_TOKEN} "
    if not text.startswith(prefix) or sep not in text:
        raise ValueError("text does not match the anchor-keyed prompt grammar")
    body = text[len(prefix):]
    keys_part, query = body.split(sep, 1)
    return keys_part.split(KEY_JOINER), query


def build_base_prompt(query: str, query_id: str = "", tokenizer: Tokenizer = count_tokens) -> PromptBundle:
    return PromptBundle(mode=MODE_BASE, text=query, prompt_tokens=tokenizer(query), query_id=query_id)


def _render_rag(chunk_texts: Sequence[str], query: str) -> str:
    return "\n\n".join([*chunk_texts, query])


def build_rag_prompt(
    query: str,
    ranked_chunks: Sequence[CodeChunk],
    window: int = DEFAULT_WINDOW,
    query_id: str = "",
    tokenizer: Tokenizer = count_tokens,
) -> PromptBundle:
    """Retrieval prompt: chunk texts in rank order, then the query.

    Chunks are included whole, in rank order, as long as the rendered prompt
    stays within the token window. If not even the first chunk fits, that
    chunk is truncated line by line (with a warning) until the prompt fits.
    The returned bundle never exceeds the window.
    """
    if window <= 0:
        raise ValueError("window must be positive")

    included: list[str] = []
    for chunk in ranked_chunks:
        candidate = _render_rag([*included, chunk.text], query)
        if tokenizer(candidate) <= window:
            included.append(chunk.text)
        else:
            break

    if not included and ranked_chunks:
        lines = ranked_chunks[0].text.splitlines(keepends=True)
        while lines and tokenizer(_render_rag(["".join(lines)], query)) > window:
            lines.pop()
        log.warning("rag prompt for %s: first chunk truncated to fit window %d", query_id or "?", window)
        if lines:
            included = ["".join(lines)]

    text = _render_rag(included, query) if included else query
    tokens = tokenizer(text)
    if tokens > window:
        # Query alone exceeds the window; degenerate but reported faithfully.
        log.warning("rag prompt for %s: query alone exceeds window %d", query_id or "?", window)
    return PromptBundle(mode=MODE_RAG, text=text, prompt_tokens=tokens, query_id=query_id)


def run_batch(
    bundles: Sequence[PromptBundle],
    backend: CompletionBackend,
    batch_size: int = DEFAULT_BATCH_SIZE,
    fan_out: int = 1,
    tokenizer: Tokenizer = count_tokens,
) -> list[InferenceResult]:
    """Execute prompts in batches, recording per-query and per-batch latency.

    Results come back in input order. A failing query yields an error result;
    the rest of the batch continues. ``fan_out`` > 1 runs queries within a
    batch concurrently (default sequential for reproducible latency).
    """
    if batch_size < 1:
        raise ValueError("batch_size must be at least 1")

    def one(bundle: PromptBundle) -> tuple[str, str | None, float]:
        t0 = time.perf_counter()
        try:
            answer = backend.complete(bundle.text)
            return answer, None, (time.perf_counter() - t0) * 1000.0
        except BackendError as exc:
            return "", str(exc), (time.perf_counter() - t0) * 1000.0

    results: list[InferenceResult] = []
    for batch_index, start in enumerate(range(0, len(bundles), batch_size)):
        batch = bundles[start:start + batch_size]
        t0 = time.perf_counter()
        if fan_out <= 1:
            outcomes = [one(b) for b in batch]
        else:
            with ThreadPoolExecutor(max_workers=fan_out) as pool:
                outcomes = list(pool.map(one, batch))
        batch_latency_ms = (time.perf_counter() - t0) * 1000.0
        for bundle, (answer, error, latency_ms) in zip(batch, outcomes):
            results.append(InferenceResult(
                query_id=bundle.query_id,
                mode=bundle.mode,
                answer_text=answer,
                latency_ms=latency_ms,
                prompt_tokens=bundle.prompt_tokens,
                completion_tokens=tokenizer(answer),
                batch_index=batch_index,
                batch_latency_ms=batch_latency_ms,
                error=error,
            ))
    return results


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def _mean_batch_latency(results: Sequence[InferenceResult]) -> float:
    per_batch = {r.batch_index: r.batch_latency_ms for r in results}
    return _mean(list(per_batch.values()))


def _reduction_pct(rag_value: float, kant_value: float) -> float:
    if rag_value == 0:
        return 0.0
    return (rag_value - kant_value) / rag_value * 100.0


def compare_efficiency(
    kant_results: Sequence[InferenceResult],
    rag_results: Sequence[InferenceResult],
) -> EfficiencyReport:
    """Latency and token comparison over the same query set.

    Every figure is recomputed from the recorded result fields only, so the
    report can be reproduced from a persisted result log.
    """
    kant_ids = sorted(r.query_id for r in kant_results)
    rag_ids = sorted(r.query_id for r in rag_results)
    if kant_ids != rag_ids:
        raise ValueError("result sets cover different query sets")

    kant_latency = _mean_batch_latency(kant_results)
    rag_latency = _mean_batch_latency(rag_results)
    kant_tokens = _mean([r.prompt_tokens for r in kant_results])
    rag_tokens = _mean([r.prompt_tokens for r in rag_results])
    return EfficiencyReport(
        query_count=len(kant_ids),
        kant_mean_batch_latency_ms=kant_latency,
        rag_mean_batch_latency_ms=rag_latency,
        kant_mean_prompt_tokens=kant_tokens,
        rag_mean_prompt_tokens=rag_tokens,
        latency_reduction_pct=_reduction_pct(rag_latency, kant_latency),
        token_reduction_pct=_reduction_pct(rag_tokens, kant_tokens),
    )


def result_to_record(result: InferenceResult) -> dict:
    return {
        "query_id": result.query_id,
        "mode": result.mode,
        "answer_text": result.answer_text,
        "latency_ms": result.latency_ms,
        "prompt_tokens": result.prompt_tokens,
        "completion_tokens": result.completion_tokens,
        "batch_index": result.batch_index,
        "batch_latency_ms": result.batch_latency_ms,
        "error": result.error,
    }


def result_from_record(record: dict) -> InferenceResult:
    return InferenceResult(
        query_id=record["query_id"],
        mode=record["mode"],
        answer_text=record["answer_text"],
        latency_ms=record["latency_ms"],
        prompt_tokens=record["prompt_tokens"],
        completion_tokens=record["completion_tokens"],
        batch_index=record["batch_index"],
        batch_latency_ms=record["batch_latency_ms"],
        error=record.get("error"),
    )
