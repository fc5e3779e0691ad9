"""Synthetic QA generation from code chunks via a completion backend.

Every chunk is expanded with two targeted prompts, one for general
understanding of the segment and one for search-style questions, and the
backend's numbered ``Qn:``/``An:`` output is parsed into linked QA pairs.
"""

from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from .anchors import derive_anchor
from .backends import BackendError, CompletionBackend
from .ingest import CodeChunk, PositionDescriptor

log = logging.getLogger(__name__)

DEFAULT_PER_PROMPT_MAX = 32

PROMPT_KINDS = ("general", "search")

_GENERAL_TEMPLATE = """\
You are writing training data for a code comprehension assistant.
Study this code segment:

{position}
---
{code}
---

Write up to {max_pairs} question/answer pairs that test general understanding
of this segment: what it does, how it works, why it behaves the way it does,
and how its pieces fit together. Answer each question from the code above only.

Output format (exactly, one line per item, no other text):
Q1: <question>
A1: <answer>
Q2: <question>
A2: <answer>
Each question and each answer must be a single line.
"""

_SEARCH_TEMPLATE = """\
You are writing training data for a codebase search assistant.
Study this code segment:

{position}
---
{code}
---

Write up to {max_pairs} question/answer pairs a developer searching this
codebase would ask to locate things: where something is implemented or
defined, which file or segment contains it, and what to look for. Ground
every answer in the segment and its location above.

Output format (exactly, one line per item, no other text):
Q1: <question>
A1: <answer>
Q2: <question>
A2: <answer>
Each question and each answer must be a single line.
"""


@dataclass(frozen=True)
class QaPair:
    id: str
    question: str
    answer: str
    chunk_id: str
    anchor_key: str
    position: PositionDescriptor
    prompt_kind: str
    intent: str | None = None
    cluster_id: str | None = None


@dataclass(frozen=True)
class GenerationPromptSet:
    chunk_id: str
    general_prompt: str
    search_prompt: str


@dataclass
class QaGenStats:
    chunks_done: int = 0
    chunks_failed: int = 0
    pairs_kept: int = 0
    pairs_dropped: int = 0
    empty_responses: int = 0
    failed_chunk_ids: list[str] = field(default_factory=list)


def render_position(position: PositionDescriptor) -> str:
    return (
        f"File: {position.file_path} "
        f"(lines {position.start_line}–{position.end_line}, segment {position.ordinal})"
    )


def build_generation_prompts(
    chunk: CodeChunk,
    position: PositionDescriptor | None = None,
    per_prompt_max: int = DEFAULT_PER_PROMPT_MAX,
) -> GenerationPromptSet:
    """Render the two deterministic generation prompts for one chunk."""
    if chunk.text == "":
        raise ValueError(f"chunk {chunk.chunk_id} has empty text")
    position = position or chunk.position
    rendered = render_position(position)
    return GenerationPromptSet(
        chunk_id=chunk.chunk_id,
        general_prompt=_GENERAL_TEMPLATE.format(
            position=rendered, code=chunk.text, max_pairs=per_prompt_max),
        search_prompt=_SEARCH_TEMPLATE.format(
            position=rendered, code=chunk.text, max_pairs=per_prompt_max),
    )


_Q_LINE = re.compile(r"^\s*Q\d+\s*[:.)]\s*(.*?)\s*$")
_A_LINE = re.compile(r"^\s*A\d+\s*[:.)]\s*(.*?)\s*$")


def parse_qa_response(raw: str) -> list[tuple[str, str]]:
    """Extract (question, answer) pairs from numbered Qn:/An: lines.

    Line-oriented: lines that are neither a question nor an answer marker are
    ignored, so interleaved noise does not break extraction. Pairs with an
    empty question or answer are dropped.
    """
    pairs: list[tuple[str, str]] = []
    pending_question: str | None = None
    for line in raw.splitlines():
        q = _Q_LINE.match(line)
        if q:
            pending_question = q.group(1)
            continue
        a = _A_LINE.match(line)
        if a and pending_question is not None:
            question, answer = pending_question.strip(), a.group(1).strip()
            if question and answer:
                pairs.append((question, answer))
            pending_question = None
    return pairs


def generate_qa(
    chunk: CodeChunk,
    backend: CompletionBackend,
    per_prompt_max: int = DEFAULT_PER_PROMPT_MAX,
    stats: QaGenStats | None = None,
) -> list[QaPair]:
    """Run both generation prompts for one chunk and parse the results.

    Raises BackendError if the backend keeps failing; parse failures only
    shrink the output. Yields at most ``2 * per_prompt_max`` pairs, each
    linked back to the chunk, its anchor, and its position.
    """
    anchor = derive_anchor(chunk.file_path, chunk.ordinal)
    prompts = build_generation_prompts(chunk, chunk.position, per_prompt_max)
    out: list[QaPair] = []
    for kind, prompt in (("general", prompts.general_prompt), ("search", prompts.search_prompt)):
        raw = backend.complete(prompt)
        parsed = parse_qa_response(raw)
        if not parsed:
            log.warning("chunk %s: %s prompt produced no parseable pairs", chunk.chunk_id, kind)
            if stats is not None:
                stats.empty_responses += 1
            continue
        kept = parsed[:per_prompt_max]
        if stats is not None:
            stats.pairs_kept += len(kept)
            stats.pairs_dropped += len(parsed) - len(kept)
        for i, (question, answer) in enumerate(kept):
            out.append(QaPair(
                id=f"{chunk.chunk_id}:{kind}:{i:04d}",
                question=question,
                answer=answer,
                chunk_id=chunk.chunk_id,
                anchor_key=anchor.key,
                position=chunk.position,
                prompt_kind=kind,
            ))
    return out


def generate_qa_corpus(
    chunks: list[CodeChunk],
    backend: CompletionBackend,
    per_prompt_max: int = DEFAULT_PER_PROMPT_MAX,
    max_workers: int = 1,
    stats: QaGenStats | None = None,
) -> list[QaPair]:
    """Generate QA pairs for every chunk; failed chunks are skipped and counted.

    Backend calls may fan out over ``max_workers`` threads; results are merged
    back in chunk order so the output is deterministic for a fixed backend.
    """
    stats = stats if stats is not None else QaGenStats()

    def one(chunk: CodeChunk) -> list[QaPair] | None:
        try:
            return generate_qa(chunk, backend, per_prompt_max, stats)
        except BackendError as exc:
            log.warning("chunk %s failed: %s", chunk.chunk_id, exc)
            return None

    if max_workers <= 1:
        results = [one(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(one, chunks))

    out: list[QaPair] = []
    for chunk, result in zip(chunks, results):
        if result is None:
            stats.chunks_failed += 1
            stats.failed_chunk_ids.append(chunk.chunk_id)
        else:
            stats.chunks_done += 1
            out.extend(result)
    return out


def qa_to_record(pair: QaPair) -> dict:
    return {
        "id": pair.id,
        "question": pair.question,
        "answer": pair.answer,
        "chunk_id": pair.chunk_id,
        "anchor_key": pair.anchor_key,
        "file_path": pair.position.file_path,
        "ordinal": pair.position.ordinal,
        "start_line": pair.position.start_line,
        "end_line": pair.position.end_line,
        "prompt_kind": pair.prompt_kind,
        "intent": pair.intent,
        "cluster_id": pair.cluster_id,
    }


def qa_from_record(record: dict) -> QaPair:
    position = PositionDescriptor(
        file_path=record["file_path"],
        ordinal=record["ordinal"],
        start_line=record["start_line"],
        end_line=record["end_line"],
    )
    return QaPair(
        id=record["id"],
        question=record["question"],
        answer=record["answer"],
        chunk_id=record["chunk_id"],
        anchor_key=record["anchor_key"],
        position=position,
        prompt_kind=record["prompt_kind"],
        intent=record.get("intent"),
        cluster_id=record.get("cluster_id"),
    )


def with_cluster(pair: QaPair, cluster_id: str) -> QaPair:
    return replace(pair, cluster_id=cluster_id)
