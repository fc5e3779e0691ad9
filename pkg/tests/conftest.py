import random

import pytest

from anchorkit.ingest import CodeChunk, PositionDescriptor, SourceFile, count_tokens


def make_chunk(text: str, file_path: str = "src/mod.py", ordinal: int = 0,
               start_line: int = 1, end_line: int | None = None) -> CodeChunk:
    end_line = end_line if end_line is not None else max(start_line, start_line + text.count("\n") - 1)
    position = PositionDescriptor(
        file_path=file_path, ordinal=ordinal, start_line=start_line, end_line=end_line)
    return CodeChunk(
        chunk_id=f"{file_path}:{ordinal}",
        file_path=file_path,
        ordinal=ordinal,
        text=text,
        position=position,
        token_count=count_tokens(text),
    )


@pytest.fixture
def chunk_factory():
    return make_chunk


def synth_code_line(rng: random.Random, width: int = 8) -> str:
    names = ["total", "value", "cache", "result", "index", "queue", "node", "flag"]
    a, b = rng.choice(names), rng.choice(names)
    forms = [
        f"{a} = {b} + {rng.randint(0, 99)}",
        f"def {a}_{b}(x):",
        f"    return {a}({b})",
        f"if {a} > {rng.randint(1, 9)}:",
        f"    {a}.append({b})",
        f"# {a} tracks the {b}",
    ]
    return rng.choice(forms)


def synth_source(rng: random.Random, lines: int) -> str:
    return "\n".join(synth_code_line(rng) for _ in range(lines)) + "\n"


def build_fixture_repo(root, n_files: int, seed: int = 7, lines_range=(3, 40),
                       subdirs=("core", "util", "svc")) -> list[str]:
    """Create a small synthetic repository; returns repo-relative paths."""
    rng = random.Random(seed)
    paths = []
    for i in range(n_files):
        sub = subdirs[i % len(subdirs)]
        rel = f"{sub}/module_{i:03d}.py"
        target = root / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(synth_source(rng, rng.randint(*lines_range)), encoding="utf-8")
        paths.append(rel)
    return sorted(paths)


@pytest.fixture
def fixture_repo_builder():
    return build_fixture_repo
