"""Walk a repository, filter non-code artifacts, and chunk files to a token budget.

Builds a throwaway repo with a code file, a binary, and an image, then shows
which files survive filtering and how a file partitions into chunks.
"""

import tempfile
from pathlib import Path

from anchorkit import FilterConfig, chunk_file, count_tokens, scan_repository

root = Path(tempfile.mkdtemp(prefix="demo_repo_"))
(root / "src").mkdir()
(root / "src" / "math_utils.py").write_text(
    "\n".join(f"def op_{i}(x):\n    return x * {i}\n" for i in range(40)))
(root / "logo.png").write_bytes(b"\x89PNG\r\n\x1a\n not really an image")
(root / "tool.bin").write_bytes(b"\x7fELF\x00\x00\x00")

files = scan_repository(root, FilterConfig())
print(f"scanned {root}")
print("kept files:", [f.repo_relative_path for f in files])

file = files[0]
print(f"\n{file.repo_relative_path}: {count_tokens(file.content)} tokens total")

for budget in (3000, 120, 40):
    chunks = chunk_file(file, budget=budget)
    print(f"\nbudget {budget}: {len(chunks)} chunk(s)")
    for c in chunks[:3]:
        print(f"  ordinal {c.ordinal}: lines {c.position.start_line}-{c.position.end_line}, "
              f"{c.token_count} tokens")
    reassembled = "".join(c.text for c in chunks)
    print("  partition exact:", reassembled == file.content)
