"""Repository scanning and token-budgeted chunking.

Walks a repository tree, filters out non-code artifacts (binaries, media,
oversized or undecodable files), and partitions each remaining file into
chunks that respect a token budget. Chunk boundaries prefer whole lines; a
single line larger than the budget is hard-split at character level.

The default tokenizer is deliberately simple and model-agnostic: runs of
identifier characters count as one token, every other non-whitespace
character counts as one token, whitespace counts as zero. Real subword
tokenizers can be plugged in behind ``count_tokens``-compatible callables.
"""

from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

log = logging.getLogger(__name__)

DEFAULT_CHUNK_TOKENS = 3000
DEFAULT_MAX_FILE_BYTES = 2 * 1024 * 1024

DEFAULT_EXCLUDED_EXTENSIONS = frozenset({
    # media
    "png", "jpg", "jpeg", "gif", "bmp", "ico", "svg", "webp", "tif", "tiff",
    "mp3", "mp4", "wav", "avi", "mov", "mkv", "flac", "ogg", "webm",
    # archives / documents
    "pdf", "zip", "tar", "gz", "bz2", "xz", "7z", "rar", "jar", "whl",
    # compiled / binary
    "so", "dylib", "dll", "exe", "bin", "o", "a", "lib", "class", "pyc", "pyo",
    # fonts
    "ttf", "otf", "woff", "woff2", "eot",
    # opaque data
    "db", "sqlite", "sqlite3", "parquet", "pickle", "pkl", "npy", "npz",
})

DEFAULT_EXCLUDED_DIRS = frozenset({
    ".git", ".hg", ".svn", ".tox", ".venv", "venv",
    "node_modules", "vendor", "third_party", "__pycache__",
    ".mypy_cache", ".pytest_cache", "dist", "build", ".idea", ".vscode",
})

# Identifier/number runs are one token; any other visible character is one token.
_TOKEN_RE = re.compile(r"[A-Za-z0-9_]+|[^\sA-Za-z0-9_]")

_SNIFF_BYTES = 8192


class IngestError(Exception):
    pass


@dataclass(frozen=True)
class WarningRecord:
    """A non-fatal problem encountered while scanning or chunking."""

    path: str
    reason: str


@dataclass(frozen=True)
class FilterConfig:
    excluded_extensions: frozenset[str] = DEFAULT_EXCLUDED_EXTENSIONS
    excluded_dirs: frozenset[str] = DEFAULT_EXCLUDED_DIRS
    max_file_bytes: int = DEFAULT_MAX_FILE_BYTES
    binary_sniff: bool = True

    def __post_init__(self):
        if self.excluded_extensions is None or self.excluded_dirs is None:
            raise ValueError("exclusion sets must not be None")
        if self.max_file_bytes <= 0:
            raise ValueError("max_file_bytes must be positive")


@dataclass(frozen=True)
class SourceFile:
    repo_relative_path: str
    content: str
    byte_len: int

    def __post_init__(self):
        p = self.repo_relative_path
        if not p:
            raise ValueError("repo_relative_path must be non-empty")
        if p.startswith("/") or ".." in p.split("/"):
            raise ValueError(f"path must be relative without '..': {p!r}")


@dataclass(frozen=True)
class PositionDescriptor:
    file_path: str
    ordinal: int
    start_line: int
    end_line: int

    def __post_init__(self):
        if self.start_line > self.end_line:
            raise ValueError("start_line must not exceed end_line")


@dataclass(frozen=True)
class CodeChunk:
    chunk_id: str
    file_path: str
    ordinal: int
    text: str
    position: PositionDescriptor
    token_count: int


def count_tokens(text: str) -> int:
    """Deterministic token count; empty text counts zero."""
    return len(_TOKEN_RE.findall(text))


Tokenizer = Callable[[str], int]


def _normalize_rel_path(path: Path, root: Path) -> str:
    return path.relative_to(root).as_posix()


def _is_excluded_dir(name: str, rel_path: str, excluded: frozenset[str]) -> bool:
    # Entries with a "/" are repo-relative prefixes; bare names match at any depth.
    for entry in excluded:
        if "/" in entry:
            e = entry.strip("/")
            if rel_path == e or rel_path.startswith(e + "/"):
                return True
        elif name == entry:
            return True
    return False


def _extension(path: Path) -> str:
    return path.suffix.lstrip(".").lower()


def scan_repository(
    root: str | os.PathLike,
    cfg: FilterConfig | None = None,
    warnings: list[WarningRecord] | None = None,
) -> list[SourceFile]:
    """Return all code files under ``root`` passing the filters, sorted by path.

    Skips (with a warning record): unreadable files, files above the size cap,
    binary-sniffed files, and files that do not decode as UTF-8.
    """
    cfg = cfg or FilterConfig()
    root_path = Path(root)
    if not root_path.is_dir():
        raise IngestError(f"repository root does not exist: {root}")

    def warn(path: str, reason: str) -> None:
        log.warning("skipping %s: %s", path, reason)
        if warnings is not None:
            warnings.append(WarningRecord(path=path, reason=reason))

    files: list[SourceFile] = []
    for dirpath, dirnames, filenames in os.walk(root_path):
        rel_dir = _normalize_rel_path(Path(dirpath), root_path) if dirpath != str(root_path) else ""
        dirnames[:] = sorted(
            d for d in dirnames
            if not _is_excluded_dir(d, f"{rel_dir}/{d}".strip("/"), cfg.excluded_dirs)
        )
        for filename in sorted(filenames):
            full = Path(dirpath) / filename
            rel = _normalize_rel_path(full, root_path)
            if full.is_symlink():
                continue
            if _extension(full) in cfg.excluded_extensions:
                continue
            try:
                size = full.stat().st_size
                if size > cfg.max_file_bytes:
                    warn(rel, f"file larger than {cfg.max_file_bytes} bytes")
                    continue
                raw = full.read_bytes()
            except OSError as exc:
                warn(rel, f"unreadable: {exc}")
                continue
            if cfg.binary_sniff and b"\x00" in raw[:_SNIFF_BYTES]:
                continue
            try:
                content = raw.decode("utf-8")
            except UnicodeDecodeError:
                warn(rel, "not valid UTF-8 text")
                continue
            files.append(SourceFile(repo_relative_path=rel, content=content, byte_len=len(raw)))
    files.sort(key=lambda f: f.repo_relative_path)
    return files


def _hard_split_line(line: str, budget: int) -> list[str]:
    """Split one over-budget line into character pieces of at most ``budget`` tokens."""
    spans = [m.span() for m in _TOKEN_RE.finditer(line)]
    pieces: list[str] = []
    start = 0
    i = 0
    while len(spans) - i > budget:
        cut = spans[i + budget - 1][1]
        pieces.append(line[start:cut])
        start = cut
        i += budget
    pieces.append(line[start:])
    return pieces


def chunk_file(
    file: SourceFile,
    budget: int = DEFAULT_CHUNK_TOKENS,
    warnings: list[WarningRecord] | None = None,
) -> list[CodeChunk]:
    """Partition ``file.content`` into chunks of at most ``budget`` tokens.

    Greedy fill by whole lines; a single line above the budget is hard-split
    inside the line (recorded as a warning). Concatenating the chunk texts in
    ordinal order reproduces the file content exactly. Empty files produce no
    chunks.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    if file.content == "":
        return []

    lines = file.content.splitlines(keepends=True)
    # (text, tokens, line_no) units; every unit except possibly the file's last
    # ends with a newline, so token counts are additive across accumulated units.
    chunks: list[CodeChunk] = []
    acc: list[str] = []
    acc_tokens = 0
    acc_start_line = 1
    acc_end_line = 1

    def flush() -> None:
        nonlocal acc, acc_tokens
        if not acc:
            return
        text = "".join(acc)
        if text == "":
            acc = []
            acc_tokens = 0
            return
        ordinal = len(chunks)
        position = PositionDescriptor(
            file_path=file.repo_relative_path,
            ordinal=ordinal,
            start_line=acc_start_line,
            end_line=acc_end_line,
        )
        chunks.append(CodeChunk(
            chunk_id=f"{file.repo_relative_path}:{ordinal}",
            file_path=file.repo_relative_path,
            ordinal=ordinal,
            text=text,
            position=position,
            token_count=acc_tokens,
        ))
        acc = []
        acc_tokens = 0

    line_no = 0
    for line in lines:
        line_no += 1
        tokens = count_tokens(line)
        if tokens > budget:
            if warnings is not None:
                warnings.append(WarningRecord(
                    path=file.repo_relative_path,
                    reason=f"line {line_no} exceeds chunk budget; hard-split",
                ))
            log.warning("%s:%d exceeds chunk budget, hard-splitting", file.repo_relative_path, line_no)
            flush()
            pieces = _hard_split_line(line, budget)
            acc_start_line = acc_end_line = line_no
            for piece in pieces[:-1]:
                acc = [piece]
                acc_tokens = count_tokens(piece)
                flush()
                acc_start_line = acc_end_line = line_no
            acc = [pieces[-1]]
            acc_tokens = count_tokens(pieces[-1])
            acc_end_line = line_no
            continue
        if acc and acc_tokens + tokens > budget:
            flush()
        if not acc:
            acc_start_line = line_no
        acc.append(line)
        acc_tokens += tokens
        acc_end_line = line_no
    flush()
    return chunks


def chunk_repository(
    files: Iterable[SourceFile],
    budget: int = DEFAULT_CHUNK_TOKENS,
    warnings: list[WarningRecord] | None = None,
) -> list[CodeChunk]:
    """Chunk every file; per-file chunking is pure, results merged in path order."""
    out: list[CodeChunk] = []
    for file in sorted(files, key=lambda f: f.repo_relative_path):
        out.extend(chunk_file(file, budget=budget, warnings=warnings))
    return out


def chunk_to_record(chunk: CodeChunk) -> dict:
    return {
        "chunk_id": chunk.chunk_id,
        "file_path": chunk.file_path,
        "ordinal": chunk.ordinal,
        "start_line": chunk.position.start_line,
        "end_line": chunk.position.end_line,
        "text": chunk.text,
        "token_count": chunk.token_count,
    }


def chunk_from_record(record: dict) -> CodeChunk:
    position = PositionDescriptor(
        file_path=record["file_path"],
        ordinal=record["ordinal"],
        start_line=record["start_line"],
        end_line=record["end_line"],
    )
    return CodeChunk(
        chunk_id=record["chunk_id"],
        file_path=record["file_path"],
        ordinal=record["ordinal"],
        text=record["text"],
        position=position,
        token_count=record["token_count"],
    )
