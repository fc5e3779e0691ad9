"""Near-duplicate question clustering.

Similarity is Jaccard over character shingles of normalized question text.
Clusters are the connected components of the "similarity strictly above
threshold" graph. MinHash/LSH only proposes candidate pairs; every edge is
verified with the exact similarity before it can merge two clusters, so LSH
can miss candidates but never create a false merge.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qa import QaPair

DEFAULT_THRESHOLD = 0.8
DEFAULT_SHINGLE_SIZE = 3
DEFAULT_PERMUTATIONS = 128
DEFAULT_BANDS = 32

# Fixed hashing seed keeps signatures (and therefore clustering) reproducible.
_PERMUTATION_SEED = 0x5EED1E55


@dataclass(frozen=True)
class SimilarityConfig:
    threshold: float = DEFAULT_THRESHOLD
    shingle_size: int = DEFAULT_SHINGLE_SIZE
    minhash_permutations: int = DEFAULT_PERMUTATIONS
    lsh_bands: int = DEFAULT_BANDS

    def __post_init__(self):
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError("threshold must be in (0, 1]")
        if self.shingle_size < 1:
            raise ValueError("shingle_size must be at least 1")
        if self.minhash_permutations < 1 or self.lsh_bands < 1:
            raise ValueError("permutations and bands must be positive")
        if self.minhash_permutations % self.lsh_bands != 0:
            raise ValueError("lsh_bands must divide minhash_permutations")


@dataclass(frozen=True)
class Cluster:
    cluster_id: str
    member_ids: tuple[str, ...]
    representative_id: str


_WS_RUN = re.compile(r"\s+")


def normalize_text(q: str) -> str:
    """Lowercase, collapse whitespace runs to one space, strip the ends."""
    return _WS_RUN.sub(" ", q).strip().lower()


def shingles(text: str, k: int = DEFAULT_SHINGLE_SIZE) -> frozenset[str]:
    """Character k-gram set; texts shorter than k shingle to themselves."""
    if text == "":
        return frozenset()
    if len(text) < k:
        return frozenset((text,))
    return frozenset(text[i:i + k] for i in range(len(text) - k + 1))


def _jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    inter = len(a & b)
    return inter / (len(a) + len(b) - inter)


def similarity(a: str, b: str, shingle_size: int = DEFAULT_SHINGLE_SIZE) -> float:
    """Jaccard similarity of the two normalized texts' shingle sets.

    Symmetric, 1.0 for identical non-empty texts, and by convention 1.0 when
    both normalize to empty.
    """
    return _jaccard(
        shingles(normalize_text(a), shingle_size),
        shingles(normalize_text(b), shingle_size),
    )


def _shingle_hashes(shingle_set: frozenset[str]) -> np.ndarray:
    values = [
        int.from_bytes(hashlib.blake2b(s.encode("utf-8"), digest_size=8).digest(), "big")
        for s in shingle_set
    ]
    return np.asarray(values, dtype=np.uint64)


class _MinHasher:
    """Multiply-shift MinHash over 64-bit shingle hashes (wraps mod 2**64)."""

    def __init__(self, num_perm: int):
        rng = np.random.default_rng(_PERMUTATION_SEED)
        self.num_perm = num_perm
        self.a = (rng.integers(1, 1 << 62, size=num_perm, dtype=np.uint64) << np.uint64(1)) | np.uint64(1)
        self.b = rng.integers(0, 1 << 62, size=num_perm, dtype=np.uint64)

    def signature(self, hashes: np.ndarray) -> np.ndarray:
        # (n_shingles, num_perm) table, column-wise minimum.
        with np.errstate(over="ignore"):
            table = hashes[:, None] * self.a[None, :] + self.b[None, :]
        return table.min(axis=0)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            if rx > ry:
                rx, ry = ry, rx
            self.parent[ry] = rx


def _pick_representative(members: Sequence[QaPair]) -> str:
    """Longest answer wins; ties go to the lexicographically smallest id."""
    best = min(members, key=lambda p: (-len(p.answer), p.id))
    return best.id


def cluster_pairs(pairs: Sequence[QaPair], cfg: SimilarityConfig | None = None) -> list[Cluster]:
    """Cluster QA pairs whose question similarity exceeds the threshold.

    Equal to the connected components of the exact pairwise graph: LSH buckets
    generate candidate pairs, each candidate is verified against the exact
    Jaccard similarity, and only verified edges are merged (union-find).
    Clusters are sorted by id; members sorted ascending.
    """
    cfg = cfg or SimilarityConfig()
    n = len(pairs)
    if n == 0:
        return []

    shingle_sets = [shingles(normalize_text(p.question), cfg.shingle_size) for p in pairs]
    uf = _UnionFind(n)

    # Questions that normalize to empty are all mutually similarity 1.0.
    empties = [i for i, s in enumerate(shingle_sets) if not s]
    if len(empties) > 1 and 1.0 > cfg.threshold:
        for i in empties[1:]:
            uf.union(empties[0], i)

    occupied = [i for i, s in enumerate(shingle_sets) if s]
    if occupied:
        hasher = _MinHasher(cfg.minhash_permutations)
        rows = cfg.minhash_permutations // cfg.lsh_bands
        signatures = {i: hasher.signature(_shingle_hashes(shingle_sets[i])) for i in occupied}

        buckets: dict[tuple[int, bytes], list[int]] = {}
        for i in occupied:
            sig = signatures[i]
            for band in range(cfg.lsh_bands):
                key = (band, sig[band * rows:(band + 1) * rows].tobytes())
                buckets.setdefault(key, []).append(i)

        checked: set[tuple[int, int]] = set()
        for members in buckets.values():
            if len(members) < 2:
                continue
            for idx_a in range(len(members)):
                for idx_b in range(idx_a + 1, len(members)):
                    i, j = members[idx_a], members[idx_b]
                    if i > j:
                        i, j = j, i
                    if (i, j) in checked or uf.find(i) == uf.find(j):
                        continue
                    checked.add((i, j))
                    if _jaccard(shingle_sets[i], shingle_sets[j]) > cfg.threshold:
                        uf.union(i, j)

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(uf.find(i), []).append(i)

    clusters = []
    for indices in groups.values():
        members = sorted(pairs[i].id for i in indices)
        clusters.append(Cluster(
            cluster_id=members[0],
            member_ids=tuple(members),
            representative_id=_pick_representative([pairs[i] for i in indices]),
        ))
    clusters.sort(key=lambda c: c.cluster_id)
    return clusters


def select_representatives(clusters: Sequence[Cluster], pairs: Sequence[QaPair]) -> list[QaPair]:
    """One pair per cluster, in cluster order, tagged with its cluster id."""
    by_id = {p.id: p for p in pairs}
    out = []
    for cluster in clusters:
        if cluster.representative_id not in cluster.member_ids:
            raise ValueError(f"representative not a member of cluster {cluster.cluster_id}")
        pair = by_id[cluster.representative_id]
        out.append(QaPair(
            id=pair.id,
            question=pair.question,
            answer=pair.answer,
            chunk_id=pair.chunk_id,
            anchor_key=pair.anchor_key,
            position=pair.position,
            prompt_kind=pair.prompt_kind,
            intent=pair.intent,
            cluster_id=cluster.cluster_id,
        ))
    return out


def cluster_to_record(cluster: Cluster) -> dict:
    return {
        "cluster_id": cluster.cluster_id,
        "member_ids": list(cluster.member_ids),
        "representative_id": cluster.representative_id,
    }


def cluster_from_record(record: dict) -> Cluster:
    return Cluster(
        cluster_id=record["cluster_id"],
        member_ids=tuple(record["member_ids"]),
        representative_id=record["representative_id"],
    )
