"""HTTP service for the blinded annotation protocol.

Serves task views (never the hidden label-to-system mapping), accepts
ratings into an append-only JSON-lines log, tracks escalation, and reports
progress and aggregate results. Endpoints are versioned under ``/v1``; the
annotator web bundle can be mounted at the root.
"""

from __future__ import annotations

import json
import time
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import jsonl
from .evaluation import (
    KIND_COMPARISON,
    KIND_QA_QUALITY,
    PREFERENCE_UNDECIDED,
    EvalItem,
    IntentLabel,
    Rating,
    escalate,
)


class EvalStore:
    """Items plus an append-only rating log, persisted under one directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.items_path = self.root / "items.jsonl"
        self.ratings_path = self.root / "ratings.jsonl"
        self.roster_path = self.root / "evaluators.json"
        self.items: dict[str, EvalItem] = {}
        self.ratings: list[dict] = []
        self.roster: list[str] = []
        if self.items_path.is_file():
            for record in jsonl.read_jsonl(self.items_path):
                item = _item_from_record(record)
                self.items[item.item_id] = item
        if self.ratings_path.is_file():
            self.ratings = jsonl.load_jsonl(self.ratings_path)
        if self.roster_path.is_file():
            with open(self.roster_path, "r", encoding="utf-8") as fh:
                self.roster = json.load(fh)

    def put_items(self, items: list[EvalItem], evaluators: list[str] | None = None) -> None:
        for item in items:
            self.items[item.item_id] = item
        if evaluators is not None:
            self.roster = sorted(evaluators)
        elif not self.roster:
            self.roster = sorted({
                i.assigned_evaluator for i in self.items.values() if i.assigned_evaluator})
        jsonl.write_json(self.roster_path, self.roster)
        self.save_items()

    def save_items(self) -> None:
        jsonl.write_jsonl(self.items_path, (
            _item_to_record(item) for item in sorted(self.items.values(), key=lambda i: i.item_id)
        ))

    def evaluators(self) -> list[str]:
        if self.roster:
            return self.roster
        known = {i.assigned_evaluator for i in self.items.values() if i.assigned_evaluator}
        known.update(e for i in self.items.values() for e in i.past_evaluators)
        return sorted(known)

    def next_item(self, evaluator: str) -> EvalItem | None:
        pending = [
            item for item in self.items.values()
            if item.assigned_evaluator == evaluator and item.status in ("pending", "escalated")
        ]
        pending.sort(key=lambda i: i.item_id)
        return pending[0] if pending else None

    def remaining(self, evaluator: str) -> int:
        return sum(
            1 for item in self.items.values()
            if item.assigned_evaluator == evaluator and item.status in ("pending", "escalated")
        )

    def ratings_for(self, item_id: str) -> list[dict]:
        return [r for r in self.ratings if r["item_id"] == item_id]

    def append_rating(self, record: dict) -> None:
        self.ratings.append(record)
        with open(self.ratings_path, "a", encoding="utf-8", newline="\n") as fh:
            fh.write(jsonl.dumps(record))
            fh.write("\n")

    def submit(self, rating: Rating) -> dict:
        """Validate, blind-resolve, escalate if flagged, and persist a rating."""
        item = self.items.get(rating.item_id)
        if item is None:
            raise LookupError(f"unknown item: {rating.item_id}")
        if any(r["evaluator_id"] == rating.evaluator_id for r in self.ratings_for(rating.item_id)):
            raise FileExistsError(f"{rating.evaluator_id} already rated item {rating.item_id}")
        if item.status not in ("pending", "escalated"):
            raise FileExistsError(f"item {rating.item_id} already rated")
        if item.assigned_evaluator != rating.evaluator_id:
            raise PermissionError(f"item {rating.item_id} is not assigned to {rating.evaluator_id}")
        rating.validate()

        record = _rating_to_log_record(rating, item)
        self.append_rating(record)
        item.past_evaluators.append(rating.evaluator_id)

        if item.status == "escalated" or rating.unclear:
            self._advance_escalation(item)
        else:
            item.status = "rated"
            item.assigned_evaluator = None
        self.save_items()
        return record

    def _advance_escalation(self, item: EvalItem) -> None:
        """Move an unclear item through second/third review to a majority vote."""
        evaluators = self.evaluators()
        votes = [_vote_value(r) for r in self.ratings_for(item.item_id)]
        outcome = escalate(item, votes, available_evaluators=len(evaluators))
        if outcome.status == "resolved":
            item.status = "resolved"
            item.assigned_evaluator = None
            return
        fresh = [e for e in evaluators if e not in item.past_evaluators]
        if outcome.status == "unresolved" or not fresh:
            item.status = "unresolved"
            item.assigned_evaluator = None
            return
        item.status = "escalated"
        item.assigned_evaluator = fresh[0]


def _vote_value(log_record: dict):
    """Canonical comparable judgment for majority voting."""
    if log_record["kind"] == KIND_QA_QUALITY:
        return tuple(sorted((log_record.get("binary") or {}).items()))
    return log_record.get("preference_mode")


def _item_to_record(item: EvalItem) -> dict:
    return {
        "item_id": item.item_id,
        "kind": item.kind,
        "payload": item.payload,
        "assigned_evaluator": item.assigned_evaluator,
        "status": item.status,
        "hidden_mapping": item.hidden_mapping,
        "past_evaluators": item.past_evaluators,
    }


def _item_from_record(record: dict) -> EvalItem:
    return EvalItem(
        item_id=record["item_id"],
        kind=record["kind"],
        payload=record["payload"],
        assigned_evaluator=record.get("assigned_evaluator"),
        status=record.get("status", "pending"),
        hidden_mapping=record.get("hidden_mapping"),
        past_evaluators=list(record.get("past_evaluators", [])),
    )


def _rating_to_log_record(rating: Rating, item: EvalItem) -> dict:
    """Resolve blinded labels to system modes before persisting.

    The mapping lives only in the server-side log; API responses built from
    items never include it.
    """
    record: dict[str, Any] = {
        "item_id": rating.item_id,
        "evaluator_id": rating.evaluator_id,
        "kind": rating.kind,
        "timestamp": rating.timestamp or time.time(),
        "unclear": rating.unclear,
    }
    if rating.kind == KIND_QA_QUALITY:
        record["binary"] = rating.binary
    if rating.kind == KIND_COMPARISON:
        mapping = item.hidden_mapping or {}
        record["preference"] = rating.preference
        if rating.preference == PREFERENCE_UNDECIDED:
            record["preference_mode"] = PREFERENCE_UNDECIDED
        else:
            record["preference_mode"] = mapping.get(rating.preference, PREFERENCE_UNDECIDED)
        record["likert_by_mode"] = {
            mapping.get(label, label): scores
            for label, scores in (rating.likert or {}).items()
        }
    if rating.intent is not None:
        record["intent"] = {
            "category": rating.intent.category,
            "interrogative": rating.intent.interrogative,
        }
    return record


class RatingBody(BaseModel):
    item_id: str
    evaluator_id: str
    kind: str
    binary: Optional[dict[str, int]] = None
    likert: Optional[dict[str, dict[str, int]]] = None
    preference: Optional[str] = None
    intent_category: Optional[str] = None
    intent_interrogative: Optional[str] = None
    unclear: bool = False
    timestamp: float = Field(default=0.0)


def create_app(store: EvalStore, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="annotation service")

    @app.get("/v1/tasks/next")
    def next_task(evaluator: str = Query(...)):
        if evaluator not in store.evaluators():
            raise HTTPException(status_code=404, detail="unknown evaluator")
        item = store.next_item(evaluator)
        remaining = store.remaining(evaluator)
        if item is None:
            return {"task": None, "remaining": 0}
        return {"task": item.task_view(remaining=remaining), "remaining": remaining}

    @app.post("/v1/ratings")
    def post_rating(body: RatingBody):
        intent = None
        if body.intent_category or body.intent_interrogative:
            try:
                intent = IntentLabel(
                    category=body.intent_category or "",
                    interrogative=body.intent_interrogative or "",
                )
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
        rating = Rating(
            item_id=body.item_id,
            evaluator_id=body.evaluator_id,
            kind=body.kind,
            binary=body.binary,
            likert=body.likert,
            preference=body.preference,
            intent=intent,
            unclear=body.unclear,
            timestamp=body.timestamp,
        )
        try:
            store.submit(rating)
        except LookupError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except PermissionError as exc:
            raise HTTPException(status_code=403, detail=str(exc))
        except FileExistsError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {
            "status": "ok",
            "item_id": body.item_id,
            "remaining": store.remaining(body.evaluator_id),
        }

    @app.get("/v1/progress")
    def progress():
        by_evaluator: dict[str, dict[str, int]] = {}
        for item in store.items.values():
            for evaluator in item.past_evaluators:
                row = by_evaluator.setdefault(evaluator, {"completed": 0, "pending": 0})
                row["completed"] += 1
            if item.assigned_evaluator and item.status in ("pending", "escalated"):
                row = by_evaluator.setdefault(item.assigned_evaluator, {"completed": 0, "pending": 0})
                row["pending"] += 1
        total = len(store.items)
        done = sum(1 for i in store.items.values() if i.status in ("rated", "resolved", "unresolved"))
        return {"total_items": total, "completed_items": done, "by_evaluator": by_evaluator}

    @app.get("/v1/report")
    def report():
        from .evaluation import aggregate

        return aggregate(store.ratings).to_record()

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app
