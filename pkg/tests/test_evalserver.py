import json

import pytest
from fastapi.testclient import TestClient

from anchorkit import jsonl
from anchorkit.evaluation import KIND_COMPARISON, KIND_QA_QUALITY, EvalItem, draw_blinded_assignments
from anchorkit.evalserver import EvalStore, create_app


def _qa_item(i: int) -> EvalItem:
    return EvalItem(
        item_id=f"qa-{i:03d}",
        kind=KIND_QA_QUALITY,
        payload={"question": f"what is {i}?", "answer": f"it is {i}.", "pair_id": f"p{i}"},
    )


def _cmp_item(i: int) -> EvalItem:
    return EvalItem(
        item_id=f"cmp-{i:03d}",
        kind=KIND_COMPARISON,
        payload={
            "question": f"compare {i}?",
            "answers_by_mode": {"kant": f"anchored {i}", "rag": f"retrieved {i}", "base": f"plain {i}"},
        },
    )


@pytest.fixture
def study(tmp_path):
    items = [_qa_item(i) for i in range(6)] + [_cmp_item(i) for i in range(6)]
    assigned = draw_blinded_assignments(items, ["alice", "bob", "carol"], seed=11)
    store = EvalStore(tmp_path / "store")
    store.put_items(assigned, evaluators=["alice", "bob", "carol"])
    client = TestClient(create_app(store))
    return store, client


def _rate_payload(item, evaluator):
    if item["kind"] == KIND_QA_QUALITY:
        return {
            "item_id": item["item_id"], "evaluator_id": evaluator, "kind": item["kind"],
            "binary": {"relatedness": 1, "usefulness": 1, "understandability": 1,
                       "accuracy": 0, "completeness": 0},
            "intent_category": "functionality", "intent_interrogative": "how",
        }
    return {
        "item_id": item["item_id"], "evaluator_id": evaluator, "kind": item["kind"],
        "preference": "A",
        "likert": {label: {"relatedness": 4, "understandability": 4, "usefulness": 3,
                           "accuracy": 3, "completeness": 2} for label in ("A", "B", "C")},
    }


class TestTasks:
    def test_next_task_and_remaining(self, study):
        _, client = study
        resp = client.get("/v1/tasks/next", params={"evaluator": "alice"})
        assert resp.status_code == 200
        body = resp.json()
        assert body["task"] is not None
        assert body["remaining"] == 4

    def test_unknown_evaluator_404(self, study):
        _, client = study
        resp = client.get("/v1/tasks/next", params={"evaluator": "mallory"})
        assert resp.status_code == 404

    def test_comparison_payload_has_three_labels(self, study):
        store, client = study
        target = next(i for i in store.items.values()
                      if i.kind == KIND_COMPARISON and i.assigned_evaluator == "alice")
        resp = client.get("/v1/tasks/next", params={"evaluator": "alice"})
        found = False
        while resp.json()["task"] is not None:
            task = resp.json()["task"]
            if task["item_id"] == target.item_id:
                assert set(task["payload"]["answers"]) == {"A", "B", "C"}
                found = True
                break
            client.post("/v1/ratings", json=_rate_payload(task, "alice"))
            resp = client.get("/v1/tasks/next", params={"evaluator": "alice"})
        assert found

    def test_blinding_no_mode_tokens_in_any_task_payload(self, study):
        store, client = study
        for evaluator in ("alice", "bob", "carol"):
            while True:
                resp = client.get("/v1/tasks/next", params={"evaluator": evaluator})
                task = resp.json()["task"]
                if task is None:
                    break
                blob = json.dumps(resp.json())
                assert "hidden_mapping" not in blob
                assert "kant" not in blob
                assert "rag" not in blob
                assert "answers_by_mode" not in blob
                client.post("/v1/ratings", json=_rate_payload(task, evaluator))


class TestRatings:
    def test_submit_and_ack(self, study):
        _, client = study
        task = client.get("/v1/tasks/next", params={"evaluator": "bob"}).json()["task"]
        resp = client.post("/v1/ratings", json=_rate_payload(task, "bob"))
        assert resp.status_code == 200
        assert resp.json()["status"] == "ok"

    def test_duplicate_rejected(self, study):
        _, client = study
        task = client.get("/v1/tasks/next", params={"evaluator": "bob"}).json()["task"]
        payload = _rate_payload(task, "bob")
        assert client.post("/v1/ratings", json=payload).status_code == 200
        assert client.post("/v1/ratings", json=payload).status_code == 409

    def test_likert_out_of_range_422(self, study):
        _, client = study
        task = None
        while task is None or task["kind"] != KIND_COMPARISON:
            resp = client.get("/v1/tasks/next", params={"evaluator": "carol"})
            task = resp.json()["task"]
            if task is None:
                pytest.skip("no comparison item assigned to carol in this seed")
            if task["kind"] != KIND_COMPARISON:
                client.post("/v1/ratings", json=_rate_payload(task, "carol"))
                task = None
        payload = _rate_payload(task, "carol")
        payload["likert"]["A"]["accuracy"] = 6
        assert client.post("/v1/ratings", json=payload).status_code == 422

    def test_wrong_evaluator_403(self, study):
        _, client = study
        task = client.get("/v1/tasks/next", params={"evaluator": "alice"}).json()["task"]
        resp = client.post("/v1/ratings", json=_rate_payload(task, "bob"))
        assert resp.status_code == 403

    def test_unknown_item_404(self, study):
        _, client = study
        payload = {"item_id": "ghost", "evaluator_id": "alice", "kind": KIND_QA_QUALITY,
                   "binary": {"relatedness": 1}}
        assert client.post("/v1/ratings", json=payload).status_code == 404

    def test_round_trip_values_to_log(self, study):
        store, client = study
        task = client.get("/v1/tasks/next", params={"evaluator": "alice"}).json()["task"]
        payload = _rate_payload(task, "alice")
        client.post("/v1/ratings", json=payload)
        logged = store.ratings_for(task["item_id"])
        assert len(logged) == 1
        record = logged[0]
        if task["kind"] == KIND_QA_QUALITY:
            assert record["binary"] == payload["binary"]
        else:
            assert record["preference"] == payload["preference"]
        # The on-disk log carries the identical record.
        on_disk = [r for r in jsonl.read_jsonl(store.ratings_path)
                   if r["item_id"] == task["item_id"]]
        assert on_disk == logged

    def test_comparison_preference_resolved_to_mode(self, study):
        store, client = study
        target = next(i for i in store.items.values()
                      if i.kind == KIND_COMPARISON and i.assigned_evaluator == "bob")
        while True:
            task = client.get("/v1/tasks/next", params={"evaluator": "bob"}).json()["task"]
            if task["item_id"] == target.item_id:
                break
            client.post("/v1/ratings", json=_rate_payload(task, "bob"))
        client.post("/v1/ratings", json=_rate_payload(task, "bob"))
        record = store.ratings_for(target.item_id)[0]
        assert record["preference_mode"] == target.hidden_mapping["A"]
        assert set(record["likert_by_mode"]) == {"kant", "rag", "base"}


class TestEscalation:
    def test_unclear_reassigns_then_majority(self, tmp_path):
        items = [_qa_item(0)]
        assigned = draw_blinded_assignments(items, ["e1", "e2", "e3"], seed=0)
        store = EvalStore(tmp_path / "s")
        store.put_items(assigned, evaluators=["e1", "e2", "e3"])
        client = TestClient(create_app(store))
        first = assigned[0].assigned_evaluator

        payload = _rate_payload({"item_id": assigned[0].item_id, "kind": KIND_QA_QUALITY}, first)
        payload["unclear"] = True
        assert client.post("/v1/ratings", json=payload).status_code == 200

        item = store.items[assigned[0].item_id]
        assert item.status == "escalated"
        second = item.assigned_evaluator
        assert second != first

        payload2 = _rate_payload({"item_id": item.item_id, "kind": KIND_QA_QUALITY}, second)
        assert client.post("/v1/ratings", json=payload2).status_code == 200
        assert store.items[item.item_id].status == "resolved"

    def test_disagreement_goes_to_third(self, tmp_path):
        items = [_qa_item(0)]
        assigned = draw_blinded_assignments(items, ["e1", "e2", "e3"], seed=0)
        store = EvalStore(tmp_path / "s")
        store.put_items(assigned, evaluators=["e1", "e2", "e3"])
        client = TestClient(create_app(store))
        item_id = assigned[0].item_id

        first = assigned[0].assigned_evaluator
        p1 = _rate_payload({"item_id": item_id, "kind": KIND_QA_QUALITY}, first)
        p1["unclear"] = True
        client.post("/v1/ratings", json=p1)

        second = store.items[item_id].assigned_evaluator
        p2 = _rate_payload({"item_id": item_id, "kind": KIND_QA_QUALITY}, second)
        p2["binary"] = {k: 1 - v for k, v in p2["binary"].items()}  # disagree
        client.post("/v1/ratings", json=p2)
        assert store.items[item_id].status == "escalated"

        third = store.items[item_id].assigned_evaluator
        assert third not in (first, second)
        p3 = _rate_payload({"item_id": item_id, "kind": KIND_QA_QUALITY}, third)
        client.post("/v1/ratings", json=p3)
        assert store.items[item_id].status == "resolved"


class TestProgressAndReport:
    def test_progress_counts(self, study):
        store, client = study
        task = client.get("/v1/tasks/next", params={"evaluator": "alice"}).json()["task"]
        client.post("/v1/ratings", json=_rate_payload(task, "alice"))
        progress = client.get("/v1/progress").json()
        assert progress["total_items"] == 12
        assert progress["completed_items"] == 1
        assert progress["by_evaluator"]["alice"]["completed"] == 1

    def test_report_matches_aggregate_of_log(self, study):
        store, client = study
        for evaluator in ("alice", "bob", "carol"):
            while True:
                task = client.get("/v1/tasks/next", params={"evaluator": evaluator}).json()["task"]
                if task is None:
                    break
                client.post("/v1/ratings", json=_rate_payload(task, evaluator))
        report = client.get("/v1/report").json()
        assert report["total_ratings"] == 12
        assert report["qa_quality_count"] == 6
        assert report["comparison_count"] == 6
        assert report["binary"]["relatedness"] == 100.0
        assert sum(report["preferences"].values()) == pytest.approx(100.0)


class TestStorePersistence:
    def test_reload_from_disk(self, tmp_path):
        items = [_qa_item(i) for i in range(3)]
        assigned = draw_blinded_assignments(items, ["e1"], seed=0)
        store = EvalStore(tmp_path / "s")
        store.put_items(assigned)
        store.submit_args = None
        client = TestClient(create_app(store))
        task = client.get("/v1/tasks/next", params={"evaluator": "e1"}).json()["task"]
        client.post("/v1/ratings", json=_rate_payload(task, "e1"))

        reloaded = EvalStore(tmp_path / "s")
        assert len(reloaded.items) == 3
        assert len(reloaded.ratings) == 1
        assert reloaded.items[task["item_id"]].status == "rated"
