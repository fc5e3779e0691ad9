"""Serving the annotator web bundle through the evaluation service.

Skipped when the frontend has not been built; the primary suite never
requires the UI.
"""

from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from anchorkit.evaluation import KIND_QA_QUALITY, EvalItem, draw_blinded_assignments
from anchorkit.evalserver import EvalStore, create_app

DIST = Path(__file__).resolve().parent.parent / "frontend" / "dist"

pytestmark = pytest.mark.skipif(not DIST.is_dir(), reason="frontend bundle not built")


@pytest.fixture
def client(tmp_path):
    items = [EvalItem(item_id="qa-0", kind=KIND_QA_QUALITY,
                      payload={"question": "q?", "answer": "a."})]
    assigned = draw_blinded_assignments(items, ["alice"], seed=0)
    store = EvalStore(tmp_path / "store")
    store.put_items(assigned, evaluators=["alice"])
    return TestClient(create_app(store, static_dir=DIST))


def test_index_served(client):
    resp = client.get("/")
    assert resp.status_code == 200
    assert "text/html" in resp.headers["content-type"]
    assert 'id="app"' in resp.text


def test_module_and_styles_served(client):
    assert client.get("/main.js").status_code == 200
    assert client.get("/styles.css").status_code == 200


def test_api_still_reachable_alongside_static(client):
    resp = client.get("/v1/tasks/next", params={"evaluator": "alice"})
    assert resp.status_code == 200
    assert resp.json()["task"]["item_id"] == "qa-0"
