"""Cluster near-duplicate questions and pick representatives.

MinHash/LSH proposes candidates; exact Jaccard over character trigrams
verifies every edge, so the clusters equal the brute-force transitive
closure at the similarity threshold.
"""

from anchorkit import SimilarityConfig, cluster_pairs, select_representatives, similarity
from anchorkit.ingest import CodeChunk, PositionDescriptor, count_tokens
from anchorkit.qa import QaPair

position = PositionDescriptor("svc/gateway.py", 0, 1, 6)


def pair(pid, question, answer):
    return QaPair(id=pid, question=question, answer=answer, chunk_id="svc/gateway.py:0",
                  anchor_key="svc/gateway.py", position=position, prompt_kind="general")


pairs = [
    pair("p0", "How does the Gateway class dispatch requests?", "Via route lookup."),
    pair("p1", "How does the Gateway class dispatch a request?", "It resolves the handler by path and calls it."),
    pair("p2", "how does the gateway class dispatch requests ?", "Short answer."),
    pair("p3", "Where are session tokens stored?", "In the Gateway session object."),
    pair("p4", "What does the route method return?", "A handler callable."),
]

print("pairwise similarities to p0:")
for p in pairs[1:]:
    print(f"  {p.id}: {similarity(pairs[0].question, p.question):.3f}")

cfg = SimilarityConfig(threshold=0.8)
clusters = cluster_pairs(pairs, cfg)
print(f"\n{len(pairs)} questions -> {len(clusters)} clusters at threshold {cfg.threshold}:")
for cluster in clusters:
    print(f"  {cluster.cluster_id}: members={list(cluster.member_ids)} "
          f"representative={cluster.representative_id}")

reps = select_representatives(clusters, pairs)
print("\nrepresentatives keep the longest answer (ties to the smallest id):")
for rep in reps:
    print(f"  {rep.id}: {rep.question!r}")
