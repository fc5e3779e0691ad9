"""Knowledge anchors: symbolic keys tying training samples to code regions.

An anchor key is derived from the artifact's repository path alone, so it is
unique within a snapshot, hierarchically meaningful (the file's directory
path is a prefix of the key), and stable under content edits that do not
change the file's chunk count. The first chunk of a file keeps the bare file
path as its key; later chunks get a ``#<ordinal>`` suffix. This keeps
single-chunk files keyed exactly by their path while still separating the
segments of large files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .ingest import CodeChunk


@dataclass(frozen=True)
class KnowledgeAnchor:
    key: str
    file_path: str
    ordinal: int
    kind: str  # "file" for a bare path key, "chunk" for a suffixed one


@dataclass
class AnchorSet:
    repo_id: str
    anchors: list[KnowledgeAnchor] = field(default_factory=list)

    def keys(self) -> list[str]:
        return [a.key for a in self.anchors]

    def by_chunk(self) -> dict[tuple[str, int], KnowledgeAnchor]:
        return {(a.file_path, a.ordinal): a for a in self.anchors}


@dataclass
class ValidationReport:
    duplicates: list[str] = field(default_factory=list)
    orphans: list[str] = field(default_factory=list)
    unanchored: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.duplicates or self.orphans or self.unanchored)


def derive_anchor(file_path: str, ordinal: int) -> KnowledgeAnchor:
    """Derive the anchor for a chunk from its path and ordinal alone.

    Idempotent: the same inputs always produce the same key. Ordinal 0 keeps
    the bare file path, so a file that later splits into more chunks never
    changes the key of its first segment.
    """
    if not file_path:
        raise ValueError("file_path must be non-empty")
    if ordinal < 0:
        raise ValueError("ordinal must be non-negative")
    if ordinal == 0:
        return KnowledgeAnchor(key=file_path, file_path=file_path, ordinal=0, kind="file")
    return KnowledgeAnchor(
        key=f"{file_path}#{ordinal}",
        file_path=file_path,
        ordinal=ordinal,
        kind="chunk",
    )


def build_anchor_set(chunks: Sequence[CodeChunk], repo_id: str = "") -> AnchorSet:
    """One anchor per chunk, in chunk order."""
    anchors = [derive_anchor(c.file_path, c.ordinal) for c in chunks]
    return AnchorSet(repo_id=repo_id, anchors=anchors)


def validate_anchor_set(
    anchor_set: AnchorSet,
    chunks: Iterable[CodeChunk] | None = None,
) -> ValidationReport:
    """Report duplicate keys, orphan anchors, and unanchored chunks.

    Cross-checks against ``chunks`` only when provided; duplicates are always
    checked. A valid set has an empty report.
    """
    report = ValidationReport()
    seen: dict[str, int] = {}
    for anchor in anchor_set.anchors:
        seen[anchor.key] = seen.get(anchor.key, 0) + 1
    report.duplicates = sorted(k for k, n in seen.items() if n > 1)

    if chunks is not None:
        chunk_keys = {(c.file_path, c.ordinal) for c in chunks}
        anchor_keys = {(a.file_path, a.ordinal) for a in anchor_set.anchors}
        report.orphans = sorted(
            a.key for a in anchor_set.anchors
            if (a.file_path, a.ordinal) not in chunk_keys
        )
        report.unanchored = sorted(
            f"{path}:{ordinal}" for (path, ordinal) in chunk_keys - anchor_keys
        )
    return report


def anchor_to_record(anchor: KnowledgeAnchor) -> dict:
    return {
        "key": anchor.key,
        "file_path": anchor.file_path,
        "ordinal": anchor.ordinal,
        "kind": anchor.kind,
    }


def anchor_from_record(record: dict) -> KnowledgeAnchor:
    return KnowledgeAnchor(
        key=record["key"],
        file_path=record["file_path"],
        ordinal=record["ordinal"],
        kind=record["kind"],
    )
