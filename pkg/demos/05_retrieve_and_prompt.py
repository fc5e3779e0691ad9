"""Retrieve anchors for a query and compare prompt sizes across modes.

The anchor-keyed prompt carries only the retrieved keys; the retrieval
prompt inlines chunk text under the context-window budget. Token counts
show why the keyed prompt is dramatically cheaper.
"""

import random

from anchorkit import (
    RetrievalConfig,
    build_anchor_set,
    build_index,
    build_kant_prompt,
    build_rag_prompt,
    derive_anchor,
    query_top_k,
)
from anchorkit.backends import StubEmbeddingBackend
from anchorkit.ingest import CodeChunk, PositionDescriptor, count_tokens

rng = random.Random(7)
chunks = []
for i in range(8):
    body = " ".join(f"word{rng.randint(0, 500)}" for _ in range(600)) + "\n"
    chunks.append(CodeChunk(
        chunk_id=f"core/part_{i}.py:0",
        file_path=f"core/part_{i}.py",
        ordinal=0,
        text=body,
        position=PositionDescriptor(f"core/part_{i}.py", 0, 1, 1),
        token_count=count_tokens(body),
    ))

backend = StubEmbeddingBackend(dim=32, seed=1)
index = build_index(chunks, build_anchor_set(chunks), backend)

query = "where is the retry logic implemented?"
ranked = query_top_k(index, query, RetrievalConfig(k=5), backend)
print("top-5 anchors for the query:")
for key, score in ranked:
    print(f"  {score:+.4f}  {key}")

keys = [key for key, _ in ranked]
kant = build_kant_prompt(query, keys, query_id="q0")
chunk_by_key = {derive_anchor(c.file_path, c.ordinal).key: c for c in chunks}
rag = build_rag_prompt(query, [chunk_by_key[k] for k in keys], window=4000, query_id="q0")

print(f"\nanchor-keyed prompt ({kant.prompt_tokens} tokens):\n  {kant.text[:120]}")
print(f"\nretrieval prompt: {rag.prompt_tokens} tokens (window 4000), "
      f"{rag.prompt_tokens / kant.prompt_tokens:.0f}x larger")
print(f"token reduction: {(rag.prompt_tokens - kant.prompt_tokens) / rag.prompt_tokens:.1%}")
