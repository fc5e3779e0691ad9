"""Dataset splitting, instruction-record rendering, export, and manifests."""

from __future__ import annotations

import math
import os
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import jsonl
from .fim import FimSample, fim_record
from .qa import QaPair, qa_from_record, qa_to_record

KEY_TOKEN = "[KEY]"
Q_TOKEN = "[Q]"
A_TOKEN = "[A]"

DEFAULT_TEST_FRACTION = 0.10

# Training hyperparameter defaults shared by every manifest.
MANIFEST_DEFAULTS = {
    "fim_epochs": 30,
    "instruction_epochs": 5,
    "fim_rate": 0.5,
    "top_k": 5,
    "context_chunk_size": 3000,
    "context_window_size": 4000,
    "batch_size": 16,
}

EPOCH_SEMANTICS = "train_until_convergence_or_max_epochs"


@dataclass(frozen=True)
class InstructionRecord:
    input_text: str
    target_text: str
    anchor_key: str
    pair_id: str


@dataclass(frozen=True)
class TrainingManifest:
    fim_epochs: int = MANIFEST_DEFAULTS["fim_epochs"]
    instruction_epochs: int = MANIFEST_DEFAULTS["instruction_epochs"]
    fim_rate: float = MANIFEST_DEFAULTS["fim_rate"]
    top_k: int = MANIFEST_DEFAULTS["top_k"]
    context_chunk_size: int = MANIFEST_DEFAULTS["context_chunk_size"]
    context_window_size: int = MANIFEST_DEFAULTS["context_window_size"]
    batch_size: int = MANIFEST_DEFAULTS["batch_size"]
    seed: int = 0
    epoch_semantics: str = EPOCH_SEMANTICS
    overrides: dict = field(default_factory=dict)
    datasets: dict = field(default_factory=dict)  # name -> {path, sha256}


def make_instruction_record(pair: QaPair) -> InstructionRecord:
    """Render one QA pair into the anchored instruction grammar."""
    return InstructionRecord(
        input_text=f"{KEY_TOKEN} {pair.anchor_key} {Q_TOKEN} {pair.question}",
        target_text=f"{A_TOKEN} {pair.answer}",
        anchor_key=pair.anchor_key,
        pair_id=pair.id,
    )


def parse_instruction_input(input_text: str) -> tuple[str, str]:
    """Inverse of the instruction grammar: recover (anchor_key, question)."""
    prefix = f"{KEY_TOKEN} "
    sep = f" {Q_TOKEN} "
    if not input_text.startswith(prefix) or sep not in input_text:
        raise ValueError("input_text does not match the instruction grammar")
    body = input_text[len(prefix):]
    anchor_key, question = body.split(sep, 1)
    return anchor_key, question


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split_dataset(
    pairs: Sequence[QaPair],
    test_fraction: float = DEFAULT_TEST_FRACTION,
    seed: int = 0,
    by_cluster: bool = False,
) -> tuple[list[QaPair], list[QaPair]]:
    """Deterministic (train, test) split; test gets round(fraction * n) rows.

    Splits are disjoint, their union is the input, and membership depends only
    on the seed. With ``by_cluster`` whole dedup clusters go to the same side
    (no near-duplicate leakage), so the test size only approximates the quota.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    n = len(pairs)
    if n == 0:
        return [], []
    test_quota = _round_half_up(test_fraction * n)
    rng = random.Random(seed)

    if by_cluster:
        group_of = lambda p: p.cluster_id or p.id
        group_indices: dict[str, list[int]] = {}
        for i, pair in enumerate(pairs):
            group_indices.setdefault(group_of(pair), []).append(i)
        group_keys = sorted(group_indices)
        rng.shuffle(group_keys)
        test_idx: set[int] = set()
        for key in group_keys:
            if len(test_idx) >= test_quota:
                break
            test_idx.update(group_indices[key])
    else:
        order = list(range(n))
        rng.shuffle(order)
        test_idx = set(order[:test_quota])

    train = [pairs[i] for i in range(n) if i not in test_idx]
    test = [pairs[i] for i in range(n) if i in test_idx]
    return train, test


def export_instruction_dataset(records: Sequence[InstructionRecord], path: str | os.PathLike) -> int:
    return jsonl.write_jsonl(path, (
        {
            "input_text": r.input_text,
            "target_text": r.target_text,
            "anchor_key": r.anchor_key,
            "pair_id": r.pair_id,
        }
        for r in records
    ))


def read_instruction_dataset(path: str | os.PathLike) -> list[InstructionRecord]:
    return [
        InstructionRecord(
            input_text=row["input_text"],
            target_text=row["target_text"],
            anchor_key=row["anchor_key"],
            pair_id=row["pair_id"],
        )
        for row in jsonl.read_jsonl(path)
    ]


def export_fim_dataset(samples: Sequence[FimSample], path: str | os.PathLike) -> int:
    return jsonl.write_jsonl(path, (fim_record(s) for s in samples))


def read_fim_dataset(path: str | os.PathLike) -> list[dict]:
    return jsonl.load_jsonl(path)


def export_qa_pairs(pairs: Sequence[QaPair], path: str | os.PathLike) -> int:
    return jsonl.write_jsonl(path, (qa_to_record(p) for p in pairs))


def read_qa_pairs(path: str | os.PathLike) -> list[QaPair]:
    return [qa_from_record(row) for row in jsonl.read_jsonl(path)]


def emit_training_manifest(
    overrides: dict | None,
    dataset_paths: dict[str, str | os.PathLike],
    out_path: str | os.PathLike,
    seed: int = 0,
) -> TrainingManifest:
    """Write the training manifest with hyperparameters and dataset checksums.

    ``overrides`` replaces individual defaults and is recorded verbatim so the
    provenance of any non-default value stays visible. Every dataset path must
    exist; checksums let a later run detect drift in the exported files.
    """
    overrides = dict(overrides or {})
    unknown = sorted(set(overrides) - set(MANIFEST_DEFAULTS))
    if unknown:
        raise ValueError(f"unknown hyperparameter overrides: {unknown}")

    base = Path(out_path).resolve().parent
    datasets = {}
    for name, path in sorted(dataset_paths.items()):
        p = Path(path)
        if not p.is_file():
            raise FileNotFoundError(f"dataset file missing: {p}")
        resolved = p.resolve()
        try:
            display = resolved.relative_to(base).as_posix()
        except ValueError:
            display = resolved.as_posix()
        datasets[name] = {"path": display, "sha256": jsonl.sha256_file(p)}

    values = {**MANIFEST_DEFAULTS, **overrides}
    manifest = TrainingManifest(
        fim_epochs=values["fim_epochs"],
        instruction_epochs=values["instruction_epochs"],
        fim_rate=values["fim_rate"],
        top_k=values["top_k"],
        context_chunk_size=values["context_chunk_size"],
        context_window_size=values["context_window_size"],
        batch_size=values["batch_size"],
        seed=seed,
        overrides=overrides,
        datasets=datasets,
    )
    jsonl.write_json(out_path, manifest_to_record(manifest))
    return manifest


def manifest_to_record(manifest: TrainingManifest) -> dict:
    return {
        "fim_epochs": manifest.fim_epochs,
        "instruction_epochs": manifest.instruction_epochs,
        "fim_rate": manifest.fim_rate,
        "top_k": manifest.top_k,
        "context_chunk_size": manifest.context_chunk_size,
        "context_window_size": manifest.context_window_size,
        "batch_size": manifest.batch_size,
        "seed": manifest.seed,
        "epoch_semantics": manifest.epoch_semantics,
        "overrides": manifest.overrides,
        "datasets": manifest.datasets,
    }


def verify_manifest_checksums(manifest_path: str | os.PathLike) -> dict[str, bool]:
    """Recompute dataset checksums; False marks a drifted file.

    Relative dataset paths resolve against the manifest's own directory.
    """
    import json

    base = Path(manifest_path).resolve().parent
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    result = {}
    for name, entry in manifest.get("datasets", {}).items():
        path = Path(entry["path"])
        if not path.is_absolute():
            path = base / path
        result[name] = path.is_file() and jsonl.sha256_file(path) == entry["sha256"]
    return result
