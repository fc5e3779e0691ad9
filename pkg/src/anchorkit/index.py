"""Exact cosine-similarity index over anchor embeddings.

Each chunk's text is embedded and stored against its anchor key; queries are
scored with a full scan (no approximation), so retrieval order is exactly the
brute-force cosine ranking with ties broken by ascending anchor key.

Persistence is a single file: a JSON header line (metric, dim, count, keys)
followed by the packed little-endian float32 vector matrix. Rebuilding from
the same embeddings reproduces the file byte for byte.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .anchors import AnchorSet, validate_anchor_set
from .backends import EmbeddingBackend
from .ingest import CodeChunk

DEFAULT_TOP_K = 5
_EMBED_BATCH = 64


class AnchorIndexError(Exception):
    """Index construction or query failed."""


@dataclass(frozen=True)
class RetrievalConfig:
    k: int = DEFAULT_TOP_K
    metric: str = "cosine"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.metric != "cosine":
            raise ValueError("only the cosine metric is supported")


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    dim: int
    norm: float

    @classmethod
    def from_values(cls, values) -> "EmbeddingVector":
        arr = np.asarray(values, dtype=np.float32)
        if arr.ndim != 1:
            raise ValueError("embedding must be one-dimensional")
        return cls(values=arr, dim=int(arr.shape[0]), norm=float(np.linalg.norm(arr.astype(np.float64))))


@dataclass(frozen=True)
class AnchorIndexEntry:
    anchor_key: str
    vector: EmbeddingVector
    source: str  # "chunk_text" or "anchor_key_text"


class AnchorIndex:
    """In-memory exact index; rows ordered as built."""

    def __init__(self, keys: Sequence[str], matrix: np.ndarray, source: str = "chunk_text"):
        matrix = np.asarray(matrix, dtype=np.float32)
        if matrix.ndim != 2 or matrix.shape[0] != len(keys):
            raise AnchorIndexError("matrix shape does not match key count")
        if len(set(keys)) != len(keys):
            raise AnchorIndexError("duplicate anchor keys in index")
        norms = np.linalg.norm(matrix.astype(np.float64), axis=1)
        if len(keys) and not np.all(norms > 0):
            raise AnchorIndexError("index contains zero-norm vectors")
        self.keys = list(keys)
        self.matrix = matrix
        self.source = source
        self.metric = "cosine"
        self._unit = matrix.astype(np.float64) / norms[:, None] if len(keys) else matrix.astype(np.float64)

    def __len__(self) -> int:
        return len(self.keys)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1]) if self.matrix.size else 0

    def entries(self) -> list[AnchorIndexEntry]:
        return [
            AnchorIndexEntry(anchor_key=k, vector=EmbeddingVector.from_values(row), source=self.source)
            for k, row in zip(self.keys, self.matrix)
        ]

    def save(self, path: str | os.PathLike) -> None:
        header = {
            "metric": self.metric,
            "dim": self.dim,
            "count": len(self.keys),
            "source": self.source,
            "keys": self.keys,
        }
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        tmp = target.with_name(target.name + ".tmp")
        try:
            with open(tmp, "wb") as fh:
                fh.write(json.dumps(header, ensure_ascii=False).encode("utf-8"))
                fh.write(b"\n")
                fh.write(np.ascontiguousarray(self.matrix, dtype="<f4").tobytes())
        except BaseException:
            tmp.unlink(missing_ok=True)
            raise
        os.replace(tmp, target)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "AnchorIndex":
        with open(path, "rb") as fh:
            header_line = fh.readline()
            header = json.loads(header_line.decode("utf-8"))
            raw = fh.read()
        count, dim = header["count"], header["dim"]
        matrix = np.frombuffer(raw, dtype="<f4", count=count * dim).reshape(count, dim).copy()
        return cls(keys=header["keys"], matrix=matrix, source=header.get("source", "chunk_text"))


def embed(text: str, backend: EmbeddingBackend) -> EmbeddingVector:
    """Embed one text; empty input is an error."""
    if not text:
        raise ValueError("cannot embed empty text")
    vectors = backend.embed([text])
    return EmbeddingVector.from_values(vectors[0])


def build_index(
    chunks: Sequence[CodeChunk],
    anchors: AnchorSet,
    backend: EmbeddingBackend,
) -> AnchorIndex:
    """Embed every chunk's text and map it to its anchor key.

    Fails atomically: duplicate keys, missing anchors, dimension mismatches,
    or any embedding failure abort the build with no partial index.
    """
    report = validate_anchor_set(anchors, chunks)
    if report.duplicates:
        raise AnchorIndexError(f"duplicate anchor keys: {report.duplicates}")
    if report.unanchored:
        raise AnchorIndexError(f"chunks without anchors: {report.unanchored}")

    lookup = anchors.by_chunk()
    keys = []
    for chunk in chunks:
        anchor = lookup.get((chunk.file_path, chunk.ordinal))
        if anchor is None:
            raise AnchorIndexError(f"no anchor for chunk {chunk.chunk_id}")
        keys.append(anchor.key)

    rows: list[list[float]] = []
    for start in range(0, len(chunks), _EMBED_BATCH):
        batch = [c.text for c in chunks[start:start + _EMBED_BATCH]]
        vectors = backend.embed(batch)
        if len(vectors) != len(batch):
            raise AnchorIndexError("embedding backend returned wrong batch size")
        rows.extend(vectors)

    dims = {len(r) for r in rows}
    if len(dims) > 1:
        raise AnchorIndexError(f"inconsistent embedding dimensions: {sorted(dims)}")
    matrix = np.asarray(rows, dtype=np.float32) if rows else np.zeros((0, 0), dtype=np.float32)
    return AnchorIndex(keys=keys, matrix=matrix, source="chunk_text")


def query_top_k(
    index: AnchorIndex,
    query_text: str,
    cfg: RetrievalConfig | None = None,
    backend: EmbeddingBackend | None = None,
    query_vector: EmbeddingVector | None = None,
) -> list[tuple[str, float]]:
    """Exact top-k anchors for a query, descending score, ties by key.

    The query is embedded via ``backend`` unless a vector is supplied
    directly. Returns min(k, index size) results with cosine scores
    clipped to [-1, 1].
    """
    cfg = cfg or RetrievalConfig()
    if len(index) == 0:
        raise AnchorIndexError("cannot query an empty index")
    if query_vector is None:
        if backend is None:
            raise ValueError("either a backend or a query_vector is required")
        if not query_text:
            raise ValueError("query text must be non-empty")
        query_vector = embed(query_text, backend)
    if query_vector.dim != index.dim:
        raise AnchorIndexError(f"query dim {query_vector.dim} != index dim {index.dim}")
    if query_vector.norm == 0:
        raise AnchorIndexError("query vector has zero norm")

    q = query_vector.values.astype(np.float64) / query_vector.norm
    scores = np.clip(index._unit @ q, -1.0, 1.0)
    ranked = sorted(zip(index.keys, scores), key=lambda kv: (-kv[1], kv[0]))
    return [(key, float(score)) for key, score in ranked[:min(cfg.k, len(index))]]


def cosine(a, b) -> float:
    """Cosine similarity of two raw vectors (error on zero norm)."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0 or nb == 0:
        raise ValueError("cosine undefined for zero vectors")
    return float(np.clip(va.dot(vb) / (na * nb), -1.0, 1.0))
