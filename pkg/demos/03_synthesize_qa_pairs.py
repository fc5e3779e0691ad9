"""Generate synthetic QA pairs from a chunk through a completion backend.

Uses the deterministic offline stub; swap in HttpCompletionBackend with a
real endpoint for production runs. Shows the two generation prompts and the
parsed, chunk-linked pairs.
"""

from anchorkit import build_generation_prompts, generate_qa
from anchorkit.backends import StubQaCompletionBackend
from anchorkit.ingest import CodeChunk, PositionDescriptor, count_tokens

text = (
    "class Gateway:\n"
    "    def __init__(self, session):\n"
    "        self.session = session\n"
    "    def dispatch(self, request):\n"
    "        handler = self.route(request.path)\n"
    "        return handler(request)\n"
)
chunk = CodeChunk(
    chunk_id="svc/gateway.py:0",
    file_path="svc/gateway.py",
    ordinal=0,
    text=text,
    position=PositionDescriptor("svc/gateway.py", 0, 1, 6),
    token_count=count_tokens(text),
)

prompts = build_generation_prompts(chunk, per_prompt_max=4)
print("--- general-understanding prompt (first lines) ---")
print("\n".join(prompts.general_prompt.splitlines()[:6]))
print("\n--- search-oriented prompt (first lines) ---")
print("\n".join(prompts.search_prompt.splitlines()[:6]))

backend = StubQaCompletionBackend(pairs=3, seed=42)
pairs = generate_qa(chunk, backend, per_prompt_max=4)
print(f"\ngenerated {len(pairs)} pairs:")
for pair in pairs:
    print(f"  [{pair.prompt_kind}] {pair.id}")
    print(f"    Q: {pair.question}")
    print(f"    A: {pair.answer}")
    print(f"    anchor: {pair.anchor_key}")
