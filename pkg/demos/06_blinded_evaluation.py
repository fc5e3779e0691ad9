"""Run the blinded human-evaluation protocol end to end, in process.

Covers sample sizing, blinded assignment, the HTTP API (via the test
client), and aggregation of the rating log.
"""

import tempfile

from fastapi.testclient import TestClient

from anchorkit import aggregate, draw_blinded_assignments, required_sample_size, required_sample_size_power
from anchorkit.evaluation import KIND_COMPARISON, EvalItem
from anchorkit.evalserver import EvalStore, create_app

n_quality = required_sample_size(confidence=0.95, margin=0.05)
n_power = required_sample_size_power(alpha=0.05, power=0.8, effect=0.3)
print(f"QA-quality review sample (95% conf, 5% margin): {n_quality}")
print(f"paired t-test sample (alpha 0.05, power 0.8, effect 0.3): {n_power}")

items = [
    EvalItem(
        item_id=f"cmp-{i:03d}",
        kind=KIND_COMPARISON,
        payload={
            "question": f"what does module {i} expose?",
            "answers_by_mode": {
                "kant": f"anchored answer {i}",
                "rag": f"retrieved answer {i}",
                "base": f"plain answer {i}",
            },
        },
    )
    for i in range(9)
]
evaluators = ["alice", "bob", "carol"]
assigned = draw_blinded_assignments(items, evaluators, seed=3)
print(f"\nassigned {len(assigned)} comparison items to {len(evaluators)} evaluators "
      f"(labels shuffled per item, mapping hidden)")

store = EvalStore(tempfile.mkdtemp(prefix="demo_eval_"))
store.put_items(assigned, evaluators=evaluators)
client = TestClient(create_app(store))

for evaluator in evaluators:
    while True:
        task = client.get("/v1/tasks/next", params={"evaluator": evaluator}).json()["task"]
        if task is None:
            break
        assert "kant" not in str(task) and "rag" not in str(task)  # blinding holds
        client.post("/v1/ratings", json={
            "item_id": task["item_id"], "evaluator_id": evaluator,
            "kind": task["kind"], "preference": "A",
            "likert": {label: {"usefulness": 4, "accuracy": 3} for label in ("A", "B", "C")},
        })

print("all items rated; progress:", client.get("/v1/progress").json()["completed_items"], "done")

report = aggregate(store.ratings)
print("\npreference percentages by (blind-resolved) system:")
for mode, pct in report.preferences.items():
    print(f"  {mode}: {pct}%")
print("usefulness medians:", {m: d["usefulness"]["median"] for m, d in report.likert.items()})
