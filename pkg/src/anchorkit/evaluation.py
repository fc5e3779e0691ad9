"""Human-evaluation protocol: sampling, blinded assignment, escalation,
and aggregation.

Sample sizes follow the Cochran formula (with optional finite-population
correction) for proportion estimates and a normal-approximation power
analysis for paired two-tailed t-tests. Comparison items are blinded by a
server-side shuffle of answer labels; the label-to-system mapping never
appears in anything sent to an annotator. Aggregation is a pure function of
the append-only rating log.
"""

from __future__ import annotations

import random
import statistics
from collections import Counter
from dataclasses import dataclass, field, replace
from math import ceil, floor
from typing import Sequence

from scipy.stats import norm

INTENT_CATEGORIES = (
    "functionality",
    "explanation",
    "purpose",
    "property",
    "workflow",
    "example usage",
    "programming concepts",
    "relationship",
    "referencing",
    "reasoning",
    "best practices",
    "knowledge recall",
    "other",
)

INTERROGATIVES = (
    "how", "what", "explain", "why", "where",
    "describe", "which", "when", "whom", "who",
)

BINARY_CRITERIA = ("relatedness", "usefulness", "understandability", "accuracy", "completeness")
LIKERT_DIMENSIONS = ("relatedness", "understandability", "usefulness", "accuracy", "completeness")

KIND_QA_QUALITY = "qa_quality"
KIND_COMPARISON = "system_comparison"

PREFERENCE_UNDECIDED = "undecided"
COMPARISON_LABELS = ("A", "B", "C")


class ProtocolError(Exception):
    pass


def required_sample_size(confidence: float, margin: float, population: int | None = None) -> int:
    """Cochran sample size at worst-case proportion 0.5, rounded to nearest.

    With a finite ``population`` the standard correction n0/(1+(n0-1)/N) is
    applied before rounding.
    """
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0, 1)")
    if not 0.0 < margin < 1.0:
        raise ValueError("margin must be in (0, 1)")
    if population is not None and population < 1:
        raise ValueError("population must be positive")
    z = float(norm.ppf((1.0 + confidence) / 2.0))
    n0 = z * z * 0.25 / (margin * margin)
    n = n0 if population is None else n0 / (1.0 + (n0 - 1.0) / population)
    return int(floor(n + 0.5))


def required_sample_size_power(alpha: float = 0.05, power: float = 0.8, effect: float = 0.3) -> int:
    """Paired two-tailed t-test sample size, normal approximation, ceiling."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    if not 0.0 < power < 1.0:
        raise ValueError("power must be in (0, 1)")
    if effect <= 0.0:
        raise ValueError("effect size must be positive")
    z_alpha = float(norm.ppf(1.0 - alpha / 2.0))
    z_power = float(norm.ppf(power))
    return ceil(((z_alpha + z_power) / effect) ** 2)


@dataclass(frozen=True)
class IntentLabel:
    category: str
    interrogative: str

    def __post_init__(self):
        if self.category not in INTENT_CATEGORIES:
            raise ValueError(f"unknown intent category: {self.category!r}")
        if self.interrogative not in INTERROGATIVES:
            raise ValueError(f"unknown interrogative: {self.interrogative!r}")


@dataclass
class EvalItem:
    item_id: str
    kind: str  # qa_quality | system_comparison
    payload: dict
    assigned_evaluator: str | None = None
    status: str = "pending"  # pending | rated | escalated | resolved | unresolved
    hidden_mapping: dict[str, str] | None = None  # label -> system mode, server-side only
    past_evaluators: list[str] = field(default_factory=list)

    def task_view(self, remaining: int | None = None) -> dict:
        """UI-safe projection: never includes the label-to-system mapping."""
        view = {
            "item_id": self.item_id,
            "kind": self.kind,
            "payload": self.payload,
        }
        if remaining is not None:
            view["remaining"] = remaining
        return view


@dataclass(frozen=True)
class Rating:
    item_id: str
    evaluator_id: str
    kind: str
    binary: dict[str, int] | None = None          # qa_quality: criterion -> 0/1
    likert: dict[str, dict[str, int]] | None = None  # comparison: label -> dimension -> 1..5
    preference: str | None = None                 # comparison: A/B/C/undecided
    intent: IntentLabel | None = None
    unclear: bool = False
    timestamp: float = 0.0

    def validate(self) -> None:
        if self.kind == KIND_QA_QUALITY:
            if not self.binary:
                raise ValueError("qa_quality rating requires binary criteria")
            for criterion, value in self.binary.items():
                if criterion not in BINARY_CRITERIA:
                    raise ValueError(f"unknown binary criterion: {criterion!r}")
                if value not in (0, 1):
                    raise ValueError(f"binary criterion {criterion} must be 0 or 1")
        elif self.kind == KIND_COMPARISON:
            if self.preference is None:
                raise ValueError("comparison rating requires a preference")
            if self.preference not in (*COMPARISON_LABELS, PREFERENCE_UNDECIDED):
                raise ValueError(f"invalid preference: {self.preference!r}")
            for label, scores in (self.likert or {}).items():
                if label not in COMPARISON_LABELS:
                    raise ValueError(f"unknown answer label: {label!r}")
                for dimension, value in scores.items():
                    if dimension not in LIKERT_DIMENSIONS:
                        raise ValueError(f"unknown likert dimension: {dimension!r}")
                    if not isinstance(value, int) or not 1 <= value <= 5:
                        raise ValueError(f"likert {dimension} must be an integer in [1, 5]")
        else:
            raise ValueError(f"unknown rating kind: {self.kind!r}")


def draw_blinded_assignments(
    items: Sequence[EvalItem],
    evaluators: Sequence[str],
    seed: int = 0,
) -> list[EvalItem]:
    """Assign each item to exactly one evaluator and blind comparison answers.

    Assignment counts are balanced within one item. For comparison items the
    raw per-system answers (payload key ``answers_by_mode``) are shuffled into
    neutral labels A/B/C; the mapping is kept server-side on the item.
    Deterministic for a fixed seed.
    """
    if not evaluators:
        raise ValueError("at least one evaluator is required")
    rng = random.Random(seed)
    order = list(items)
    rng.shuffle(order)

    assigned: list[EvalItem] = []
    for i, item in enumerate(order):
        evaluator = evaluators[i % len(evaluators)]
        payload = dict(item.payload)
        mapping = item.hidden_mapping
        if item.kind == KIND_COMPARISON:
            by_mode = payload.pop("answers_by_mode", None)
            if by_mode is None:
                raise ProtocolError(f"comparison item {item.item_id} lacks answers_by_mode")
            modes = sorted(by_mode)
            labels = COMPARISON_LABELS[:len(modes)]
            shuffled = rng.sample(modes, len(modes))
            mapping = dict(zip(labels, shuffled))
            payload["answers"] = {label: by_mode[mode] for label, mode in mapping.items()}
        assigned.append(replace(
            item,
            payload=payload,
            assigned_evaluator=evaluator,
            status="pending",
            hidden_mapping=mapping,
        ))
    assigned.sort(key=lambda it: it.item_id)
    return assigned


@dataclass(frozen=True)
class EscalationResult:
    status: str  # resolved | needs_more | unresolved
    value: object = None


def escalate(item: EvalItem, ratings: Sequence, available_evaluators: int = 3) -> EscalationResult:
    """Majority-vote escalation for an item flagged unclear.

    One rating: a second opinion is needed. Two agreeing ratings resolve; two
    disagreeing ratings need a third evaluator (unresolved when none exists).
    Three ratings resolve by majority, or stay unresolved without one.
    """
    votes = list(ratings)
    if not votes:
        raise ValueError("escalation requires at least the first rating")
    if len(votes) == 1:
        return EscalationResult("needs_more")
    if len(votes) == 2:
        if votes[0] == votes[1]:
            return EscalationResult("resolved", votes[0])
        if available_evaluators < 3:
            return EscalationResult("unresolved")
        return EscalationResult("needs_more")
    top, count = Counter(votes[:3]).most_common(1)[0]
    if count >= 2:
        return EscalationResult("resolved", top)
    return EscalationResult("unresolved")


def _pct(numerator: int, denominator: int) -> float:
    return round(numerator / denominator * 100.0, 2) if denominator else 0.0


def _stdev(values: list[int]) -> float:
    return statistics.stdev(values) if len(values) > 1 else 0.0


@dataclass
class SummaryReport:
    total_ratings: int = 0
    comparison_count: int = 0
    qa_quality_count: int = 0
    preferences: dict[str, float] = field(default_factory=dict)       # mode or undecided -> %
    likert: dict[str, dict[str, dict[str, float]]] = field(default_factory=dict)  # mode -> dim -> {median, stdev, n}
    binary: dict[str, float] = field(default_factory=dict)            # criterion -> %
    intent_categories: dict[str, int] = field(default_factory=dict)
    interrogatives: dict[str, int] = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "total_ratings": self.total_ratings,
            "comparison_count": self.comparison_count,
            "qa_quality_count": self.qa_quality_count,
            "preferences": self.preferences,
            "likert": self.likert,
            "binary": self.binary,
            "intent_categories": self.intent_categories,
            "interrogatives": self.interrogatives,
        }


def aggregate(log_records: Sequence[dict]) -> SummaryReport:
    """Summarize a rating log (as persisted by the service).

    Expects log records with label-resolved fields: ``preference_mode`` for
    comparisons (a system mode or "undecided") and ``likert_by_mode`` mapping
    mode -> dimension -> score. Order-independent and side-effect free.
    """
    report = SummaryReport(total_ratings=len(log_records))
    if not log_records:
        return report

    preference_counts: Counter = Counter()
    likert_values: dict[str, dict[str, list[int]]] = {}
    binary_hits: Counter = Counter()
    binary_totals: Counter = Counter()

    for record in log_records:
        kind = record.get("kind")
        if kind == KIND_COMPARISON:
            report.comparison_count += 1
            preference_counts[record.get("preference_mode") or PREFERENCE_UNDECIDED] += 1
            for mode, scores in (record.get("likert_by_mode") or {}).items():
                for dimension, value in scores.items():
                    likert_values.setdefault(mode, {}).setdefault(dimension, []).append(value)
        elif kind == KIND_QA_QUALITY:
            report.qa_quality_count += 1
            for criterion, value in (record.get("binary") or {}).items():
                binary_totals[criterion] += 1
                binary_hits[criterion] += 1 if value else 0
        intent = record.get("intent") or {}
        if intent.get("category"):
            report.intent_categories[intent["category"]] = (
                report.intent_categories.get(intent["category"], 0) + 1)
        if intent.get("interrogative"):
            report.interrogatives[intent["interrogative"]] = (
                report.interrogatives.get(intent["interrogative"], 0) + 1)

    report.preferences = {
        mode: _pct(count, report.comparison_count)
        for mode, count in sorted(preference_counts.items())
    }
    report.likert = {
        mode: {
            dimension: {
                "median": float(statistics.median(values)),
                "stdev": round(_stdev(values), 3),
                "n": len(values),
            }
            for dimension, values in sorted(dims.items())
        }
        for mode, dims in sorted(likert_values.items())
    }
    report.binary = {
        criterion: _pct(binary_hits[criterion], binary_totals[criterion])
        for criterion in sorted(binary_totals)
    }
    return report


def sample_items(pool: Sequence, n: int, seed: int = 0) -> list:
    """Uniform sample without replacement, deterministic under seed."""
    if n >= len(pool):
        return list(pool)
    rng = random.Random(seed)
    return rng.sample(list(pool), n)
