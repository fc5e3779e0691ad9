"""Fill-in-the-middle sample construction with anchor-conditioned rendering.

Each chunk yields one sample per pass: with probability ``fim_rate`` the text
is split at two uniformly drawn character positions into prefix/middle/suffix,
otherwise the sample stays causal (full text as target). Rendering uses the
fixed grammar ``[KEY] <anchor> [CTX] <prefix> <FILL> <suffix>`` so exports are
bit-exact and parseable.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

from .anchors import KnowledgeAnchor
from .ingest import CodeChunk

KEY_TOKEN = "[KEY]"
CTX_TOKEN = "[CTX]"
FILL_TOKEN = "<FILL>"

DEFAULT_FIM_RATE = 0.5


@dataclass(frozen=True)
class FimSample:
    anchor_key: str
    prefix: str
    middle: str
    suffix: str
    is_fim: bool
    seed_trace: tuple  # raw RNG draws, recorded for reproducibility audits

    @property
    def source_text(self) -> str:
        return self.prefix + self.middle + self.suffix


@dataclass(frozen=True)
class RenderedSample:
    input_text: str
    target_text: str


def rng_for_chunk(seed: int, chunk_id: str) -> random.Random:
    """Independent per-chunk RNG stream derived from the global seed."""
    digest = hashlib.sha256(f"{seed}:{chunk_id}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def make_fim_sample(
    chunk: CodeChunk,
    anchor: KnowledgeAnchor,
    fim_rate: float = DEFAULT_FIM_RATE,
    rng: random.Random | None = None,
) -> FimSample:
    """Build one training sample for ``chunk``.

    Cut points are drawn uniformly over character positions and sorted. An
    empty middle is re-drawn once to avoid a degenerate target, then accepted
    as-is. The split always reconstructs: prefix + middle + suffix equals the
    chunk text exactly.
    """
    if not 0.0 <= fim_rate <= 1.0:
        raise ValueError("fim_rate must be within [0, 1]")
    if chunk.text == "":
        raise ValueError(f"chunk {chunk.chunk_id} has empty text")
    rng = rng or random.Random()

    u = rng.random()
    if u < fim_rate:
        n = len(chunk.text)
        a, b = sorted((rng.randint(0, n), rng.randint(0, n)))
        trace: list = [u, a, b]
        if a == b:
            a, b = sorted((rng.randint(0, n), rng.randint(0, n)))
            trace += [a, b]
        return FimSample(
            anchor_key=anchor.key,
            prefix=chunk.text[:a],
            middle=chunk.text[a:b],
            suffix=chunk.text[b:],
            is_fim=True,
            seed_trace=tuple(trace),
        )
    return FimSample(
        anchor_key=anchor.key,
        prefix=chunk.text,
        middle="",
        suffix="",
        is_fim=False,
        seed_trace=(u,),
    )


def render_fim_text(sample: FimSample) -> RenderedSample:
    """Render to (input, target) using the fixed sentinel grammar."""
    if sample.is_fim:
        input_text = (
            f"{KEY_TOKEN} {sample.anchor_key} {CTX_TOKEN} "
            f"{sample.prefix} {FILL_TOKEN} {sample.suffix}"
        )
        return RenderedSample(input_text=input_text, target_text=sample.middle)
    input_text = f"{KEY_TOKEN} {sample.anchor_key} {CTX_TOKEN} "
    return RenderedSample(input_text=input_text, target_text=sample.prefix)


def fim_record(sample: FimSample) -> dict:
    rendered = render_fim_text(sample)
    return {
        "input": rendered.input_text,
        "target": rendered.target_text,
        "anchor_key": sample.anchor_key,
        "is_fim": sample.is_fim,
    }
