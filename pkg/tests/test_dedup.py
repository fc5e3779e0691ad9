import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anchorkit.dedup import (
    Cluster,
    SimilarityConfig,
    cluster_pairs,
    normalize_text,
    select_representatives,
    similarity,
)
from anchorkit.qa import QaPair

from conftest import make_chunk


def _pair(pair_id: str, question: str, answer: str = "an answer") -> QaPair:
    chunk = make_chunk("x = 1\n")
    return QaPair(
        id=pair_id,
        question=question,
        answer=answer,
        chunk_id=chunk.chunk_id,
        anchor_key="src/mod.py",
        position=chunk.position,
        prompt_kind="general",
    )


def brute_force_clusters(pairs, cfg: SimilarityConfig) -> set[frozenset]:
    """O(n^2) oracle: transitive closure of the strict >threshold relation."""
    n = len(pairs)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            if similarity(pairs[i].question, pairs[j].question, cfg.shingle_size) > cfg.threshold:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri
    groups: dict[int, set[str]] = {}
    for i in range(n):
        groups.setdefault(find(i), set()).add(pairs[i].id)
    return {frozenset(g) for g in groups.values()}


def mutated_questions(rng: random.Random, n: int) -> list[QaPair]:
    stems = [
        "how does the request router dispatch handlers",
        "what does the cache layer evict first",
        "where is the retry backoff implemented",
        "which module owns the session tokens",
        "why does the parser skip blank lines",
        "how is the worker queue drained on shutdown",
        "what happens when the index rebuild fails",
        "where are the batch latencies recorded",
    ]
    out = []
    for i in range(n):
        base = rng.choice(stems)
        chars = list(base)
        for _ in range(rng.randint(0, 6)):
            pos = rng.randrange(len(chars))
            op = rng.random()
            if op < 0.4:
                chars[pos] = rng.choice("abcdefghijklmnopqrstuvwxyz ")
            elif op < 0.7:
                chars.insert(pos, rng.choice("aeiou"))
            elif len(chars) > 5:
                del chars[pos]
        out.append(_pair(f"q{i:04d}", "".join(chars) + "?"))
    return out


class TestNormalizeText:
    def test_example(self):
        assert normalize_text("  How  does X? ") == "how does x?"

    def test_empty(self):
        assert normalize_text("") == ""

    @given(st.text(max_size=200))
    def test_idempotent(self, s):
        assert normalize_text(normalize_text(s)) == normalize_text(s)


class TestSimilarity:
    def test_identical(self):
        assert similarity("how does x work", "how does x work") == 1.0

    def test_disjoint(self):
        assert similarity("aaaa", "zzzz") == 0.0

    def test_hand_enumerated_trigram_value(self):
        # Independent enumeration of 3-gram sets for both strings.
        a, b = "how does x work", "how does y work"
        ga = {a[i:i + 3] for i in range(len(a) - 2)}
        gb = {b[i:i + 3] for i in range(len(b) - 2)}
        expected = len(ga & gb) / len(ga | gb)
        assert expected == 10 / 16
        assert similarity(a, b) == pytest.approx(expected)

    def test_both_empty_is_one(self):
        assert similarity("   ", "\t\n") == 1.0

    def test_one_empty_is_zero(self):
        assert similarity("", "words") == 0.0

    @given(st.text(max_size=80), st.text(max_size=80))
    def test_symmetric_and_bounded(self, a, b):
        s = similarity(a, b)
        assert s == similarity(b, a)
        assert 0.0 <= s <= 1.0


class TestClusterPairs:
    def test_three_identical_one_unique(self):
        pairs = [
            _pair("a", "What does the gateway do?"),
            _pair("b", "What does the gateway do?"),
            _pair("c", "What does the gateway do?"),
            _pair("d", "Completely unrelated topic about parsers"),
        ]
        clusters = cluster_pairs(pairs)
        sizes = sorted(len(c.member_ids) for c in clusters)
        assert sizes == [1, 3]

    def test_no_pairs(self):
        assert cluster_pairs([]) == []

    def test_oracle_equivalence_300_mutations(self):
        rng = random.Random(77)
        pairs = mutated_questions(rng, 300)
        cfg = SimilarityConfig(threshold=0.8)
        ours = {frozenset(c.member_ids) for c in cluster_pairs(pairs, cfg)}
        oracle = brute_force_clusters(pairs, cfg)
        assert ours == oracle

    def test_partition_property(self):
        rng = random.Random(5)
        pairs = mutated_questions(rng, 120)
        clusters = cluster_pairs(pairs)
        seen = [m for c in clusters for m in c.member_ids]
        assert sorted(seen) == sorted(p.id for p in pairs)

    def test_monotonic_in_threshold(self):
        rng = random.Random(11)
        pairs = mutated_questions(rng, 150)
        counts = []
        for threshold in (0.5, 0.7, 0.8, 0.9):
            counts.append(len(cluster_pairs(pairs, SimilarityConfig(threshold=threshold))))
        assert counts == sorted(counts)

    def test_empty_questions_cluster_together(self):
        pairs = [_pair("a", "  "), _pair("b", "\t"), _pair("c", "real question here")]
        clusters = cluster_pairs(pairs)
        assert {frozenset(c.member_ids) for c in clusters} == {
            frozenset({"a", "b"}), frozenset({"c"})}

    def test_threshold_one_never_merges(self):
        pairs = [_pair("a", "same text"), _pair("b", "same text")]
        clusters = cluster_pairs(pairs, SimilarityConfig(threshold=1.0))
        assert len(clusters) == 2

    def test_bands_must_divide_permutations(self):
        with pytest.raises(ValueError):
            SimilarityConfig(minhash_permutations=128, lsh_bands=33)


class TestSelectRepresentatives:
    def test_singleton(self):
        pairs = [_pair("only", "a question?", answer="short")]
        clusters = cluster_pairs(pairs)
        reps = select_representatives(clusters, pairs)
        assert [r.id for r in reps] == ["only"]

    def test_longest_answer_wins(self):
        pairs = [
            _pair("a", "identical question?", answer="x" * 10),
            _pair("b", "identical question?", answer="y" * 40),
        ]
        clusters = cluster_pairs(pairs)
        reps = select_representatives(clusters, pairs)
        assert [r.id for r in reps] == ["b"]

    def test_tie_breaks_to_smaller_id(self):
        pairs = [
            _pair("bb", "identical question?", answer="same size"),
            _pair("aa", "identical question?", answer="same size"),
        ]
        clusters = cluster_pairs(pairs)
        reps = select_representatives(clusters, pairs)
        assert [r.id for r in reps] == ["aa"]

    def test_one_per_cluster_with_cluster_id(self):
        rng = random.Random(3)
        pairs = mutated_questions(rng, 60)
        clusters = cluster_pairs(pairs)
        reps = select_representatives(clusters, pairs)
        assert len(reps) == len(clusters)
        assert all(r.cluster_id == c.cluster_id for r, c in zip(reps, clusters))
