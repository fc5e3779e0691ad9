"""End-to-end pipeline orchestration with resumable, checksum-skipped stages.

Stage order: ingest -> anchors -> fim -> qagen -> dedup -> export -> index.
Each stage reads its predecessor's artifact file and writes its own, so a
failed run resumes from the last good stage. A state file records the config
fingerprint and output checksums; an unchanged stage is skipped on rerun.
"""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path

from . import jsonl
from .anchors import anchor_to_record, build_anchor_set, validate_anchor_set
from .config import PipelineConfig, wire_backends
from .dataset import (
    emit_training_manifest,
    export_fim_dataset,
    export_instruction_dataset,
    export_qa_pairs,
    make_instruction_record,
    read_qa_pairs,
    split_dataset,
)
from .dedup import cluster_pairs, cluster_to_record, select_representatives
from .fim import make_fim_sample, rng_for_chunk
from .index import build_index
from .ingest import FilterConfig, chunk_from_record, chunk_to_record, chunk_repository, scan_repository
from .qa import QaGenStats, generate_qa_corpus
from .anchors import derive_anchor

log = logging.getLogger(__name__)

ARTIFACTS = {
    "chunks": "chunks.jsonl",
    "anchors": "anchors.jsonl",
    "fim": "fim.jsonl",
    "qa_raw": "qa_raw.jsonl",
    "qa_dedup": "qa_dedup.jsonl",
    "clusters": "clusters.jsonl",
    "instr_train": "instr_train.jsonl",
    "instr_test": "instr_test.jsonl",
    "manifest": "manifest.json",
    "index": "anchors.idx",
}

STAGES = ("ingest", "anchors", "fim", "qagen", "dedup", "export", "index")

STAGE_OUTPUTS = {
    "ingest": ("chunks",),
    "anchors": ("anchors",),
    "fim": ("fim",),
    "qagen": ("qa_raw",),
    "dedup": ("qa_dedup", "clusters"),
    "export": ("instr_train", "instr_test", "manifest"),
    "index": ("index",),
}


class PipelineError(Exception):
    pass


def _fingerprint(cfg: PipelineConfig) -> str:
    payload = {**cfg.stage_fingerprint(), "transcript": cfg.transcript}
    blob = json.dumps(payload, sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


class _State:
    def __init__(self, path: Path):
        self.path = path
        self.data: dict = {}
        if path.is_file():
            with open(path, "r", encoding="utf-8") as fh:
                self.data = json.load(fh)

    def stage_done(self, stage: str, fingerprint: str, outputs: dict[str, Path]) -> bool:
        entry = self.data.get(stage)
        if not entry or entry.get("fingerprint") != fingerprint:
            return False
        for name, path in outputs.items():
            recorded = entry.get("outputs", {}).get(name)
            if not recorded or not path.is_file() or jsonl.sha256_file(path) != recorded:
                return False
        return True

    def record(self, stage: str, fingerprint: str, outputs: dict[str, Path]) -> None:
        self.data[stage] = {
            "fingerprint": fingerprint,
            "outputs": {name: jsonl.sha256_file(path) for name, path in outputs.items()},
        }
        jsonl.write_json(self.path, self.data)


def run_pipeline(cfg: PipelineConfig, force: bool = False) -> dict:
    """Run every stage and return the artifact manifest.

    A stage whose config fingerprint and outputs are unchanged is skipped.
    Failures halt with the stage name and a resumption hint.
    """
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {name: out_dir / filename for name, filename in ARTIFACTS.items()}
    state = _State(out_dir / "pipeline_state.json")
    fingerprint = _fingerprint(cfg)
    completion, embedding, recorder = wire_backends(cfg)

    def run_stage(stage: str, fn) -> None:
        outputs = {name: paths[name] for name in STAGE_OUTPUTS[stage]}
        if not force and state.stage_done(stage, fingerprint, outputs):
            log.info("stage %s unchanged, skipping", stage)
            return
        try:
            fn()
        except Exception as exc:
            raise PipelineError(
                f"stage {stage} failed: {exc}; fix the cause and rerun the pipeline "
                f"(earlier stages resume from their artifacts in {out_dir})"
            ) from exc
        state.record(stage, fingerprint, outputs)

    def stage_ingest() -> None:
        files = scan_repository(cfg.repo_root, FilterConfig())
        chunks = chunk_repository(files, budget=cfg.chunk_tokens)
        jsonl.write_jsonl(paths["chunks"], (chunk_to_record(c) for c in chunks))

    def stage_anchors() -> None:
        chunks = [chunk_from_record(r) for r in jsonl.read_jsonl(paths["chunks"])]
        anchor_set = build_anchor_set(chunks, repo_id=str(cfg.repo_root))
        report = validate_anchor_set(anchor_set, chunks)
        if not report.ok:
            raise PipelineError(f"anchor validation failed: {report}")
        jsonl.write_jsonl(paths["anchors"], (anchor_to_record(a) for a in anchor_set.anchors))

    def stage_fim() -> None:
        chunks = [chunk_from_record(r) for r in jsonl.read_jsonl(paths["chunks"])]
        samples = []
        for chunk in chunks:
            anchor = derive_anchor(chunk.file_path, chunk.ordinal)
            rng = rng_for_chunk(cfg.seed, chunk.chunk_id)
            samples.append(make_fim_sample(chunk, anchor, cfg.fim_rate, rng))
        export_fim_dataset(samples, paths["fim"])

    def stage_qagen() -> None:
        chunks = [chunk_from_record(r) for r in jsonl.read_jsonl(paths["chunks"])]
        stats = QaGenStats()
        pairs = generate_qa_corpus(chunks, completion, per_prompt_max=cfg.per_prompt_max, stats=stats)
        if stats.chunks_failed:
            log.warning("%d chunks failed QA generation: %s",
                        stats.chunks_failed, stats.failed_chunk_ids[:10])
        export_qa_pairs(pairs, paths["qa_raw"])

    def stage_dedup() -> None:
        pairs = read_qa_pairs(paths["qa_raw"])
        clusters = cluster_pairs(pairs, cfg.dedup)
        representatives = select_representatives(clusters, pairs)
        jsonl.write_jsonl(paths["clusters"], (cluster_to_record(c) for c in clusters))
        export_qa_pairs(representatives, paths["qa_dedup"])

    def stage_export() -> None:
        pairs = read_qa_pairs(paths["qa_dedup"])
        train, test = split_dataset(pairs, test_fraction=cfg.test_fraction, seed=cfg.seed)
        export_instruction_dataset([make_instruction_record(p) for p in train], paths["instr_train"])
        export_instruction_dataset([make_instruction_record(p) for p in test], paths["instr_test"])
        emit_training_manifest(
            overrides=_manifest_overrides(cfg),
            dataset_paths={
                "fim": paths["fim"],
                "instr_train": paths["instr_train"],
                "instr_test": paths["instr_test"],
            },
            out_path=paths["manifest"],
            seed=cfg.seed,
        )

    def stage_index() -> None:
        chunks = [chunk_from_record(r) for r in jsonl.read_jsonl(paths["chunks"])]
        anchor_set = build_anchor_set(chunks, repo_id=str(cfg.repo_root))
        index = build_index(chunks, anchor_set, embedding)
        index.save(paths["index"])

    run_stage("ingest", stage_ingest)
    run_stage("anchors", stage_anchors)
    run_stage("fim", stage_fim)
    run_stage("qagen", stage_qagen)
    run_stage("dedup", stage_dedup)
    run_stage("export", stage_export)
    run_stage("index", stage_index)

    if recorder is not None and cfg.transcript.get("record") and recorder.records:
        recorder.save(cfg.transcript["record"])

    manifest = {
        "seed": cfg.seed,
        "config_fingerprint": fingerprint,
        "out_dir": str(out_dir),
        "artifacts": {
            name: {"path": path.name, "sha256": jsonl.sha256_file(path)}
            for name, path in sorted(paths.items())
            if path.is_file()
        },
    }
    jsonl.write_json(out_dir / "pipeline_manifest.json", manifest)
    return manifest


def _manifest_overrides(cfg: PipelineConfig) -> dict:
    overrides = {}
    if cfg.fim_rate != 0.5:
        overrides["fim_rate"] = cfg.fim_rate
    if cfg.top_k != 5:
        overrides["top_k"] = cfg.top_k
    if cfg.chunk_tokens != 3000:
        overrides["context_chunk_size"] = cfg.chunk_tokens
    if cfg.context_window_size != 4000:
        overrides["context_window_size"] = cfg.context_window_size
    if cfg.batch_size != 16:
        overrides["batch_size"] = cfg.batch_size
    return overrides
