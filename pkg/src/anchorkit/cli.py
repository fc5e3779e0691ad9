"""Command-line entry point orchestrating every pipeline stage."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import jsonl
from .anchors import anchor_to_record, build_anchor_set, derive_anchor, validate_anchor_set
from .backends import StubAnswerBackend, TranscriptRecorder, TranscriptReplayBackend
from .config import ConfigError, PipelineConfig, make_completion_backend, make_embedding_backend
from .dataset import (
    emit_training_manifest,
    export_fim_dataset,
    export_instruction_dataset,
    export_qa_pairs,
    make_instruction_record,
    read_qa_pairs,
    split_dataset,
)
from .dedup import SimilarityConfig, cluster_pairs, cluster_to_record, select_representatives
from .evaluation import (
    KIND_COMPARISON,
    KIND_QA_QUALITY,
    EvalItem,
    aggregate,
    draw_blinded_assignments,
    required_sample_size,
    sample_items,
)
from .evalserver import EvalStore, create_app
from .fim import make_fim_sample, rng_for_chunk
from .gateway import (
    MODES,
    build_base_prompt,
    build_kant_prompt,
    build_rag_prompt,
    result_to_record,
    run_batch,
)
from .index import AnchorIndex, RetrievalConfig, build_index, query_top_k
from .ingest import (
    DEFAULT_CHUNK_TOKENS,
    FilterConfig,
    chunk_from_record,
    chunk_repository,
    chunk_to_record,
    scan_repository,
)
from .pipeline import PipelineError, run_pipeline
from .qa import QaGenStats, generate_qa_corpus

log = logging.getLogger(__name__)


def _load_chunks(path: str):
    return [chunk_from_record(r) for r in jsonl.read_jsonl(path)]


def _completion_backend(backend_url: str | None, model: str, stub: bool, replay: str | None):
    if replay:
        return TranscriptReplayBackend(replay)
    if stub or not backend_url:
        return make_completion_backend({"stub": True})
    return make_completion_backend({"endpoint": backend_url, "model": model})


@click.group()
@click.option("--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose: bool) -> None:
    """Anchored training-data synthesis, retrieval, and evaluation pipeline."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.option("--root", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--chunk-tokens", default=DEFAULT_CHUNK_TOKENS, show_default=True)
@click.option("--max-file-bytes", default=2 * 1024 * 1024, show_default=True)
@click.option("--out", required=True, type=click.Path())
def ingest(root: str, chunk_tokens: int, max_file_bytes: int, out: str) -> None:
    """Scan a repository and write token-budgeted chunks."""
    cfg = FilterConfig(max_file_bytes=max_file_bytes)
    files = scan_repository(root, cfg)
    chunks = chunk_repository(files, budget=chunk_tokens)
    n = jsonl.write_jsonl(out, (chunk_to_record(c) for c in chunks))
    click.echo(f"wrote {n} chunks from {len(files)} files to {out}")


@main.command()
@click.option("--chunks", "chunks_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def anchors(chunks_path: str, out: str) -> None:
    """Derive and validate knowledge anchors for every chunk."""
    chunks = _load_chunks(chunks_path)
    anchor_set = build_anchor_set(chunks)
    report = validate_anchor_set(anchor_set, chunks)
    if not report.ok:
        raise click.ClickException(f"anchor validation failed: duplicates={report.duplicates}")
    n = jsonl.write_jsonl(out, (anchor_to_record(a) for a in anchor_set.anchors))
    click.echo(f"wrote {n} anchors to {out}")


@main.command()
@click.option("--chunks", "chunks_path", required=True, type=click.Path(exists=True))
@click.option("--anchors", "anchors_path", type=click.Path(exists=True), help="Unused keys source; anchors derive from chunks.")
@click.option("--fim-rate", default=0.5, show_default=True)
@click.option("--seed", required=True, type=int)
@click.option("--out", required=True, type=click.Path())
def fim(chunks_path: str, anchors_path: str | None, fim_rate: float, seed: int, out: str) -> None:
    """Build anchored fill-in-the-middle training samples."""
    chunks = _load_chunks(chunks_path)
    samples = []
    for chunk in chunks:
        anchor = derive_anchor(chunk.file_path, chunk.ordinal)
        samples.append(make_fim_sample(chunk, anchor, fim_rate, rng_for_chunk(seed, chunk.chunk_id)))
    n = export_fim_dataset(samples, out)
    fim_count = sum(1 for s in samples if s.is_fim)
    click.echo(f"wrote {n} samples ({fim_count} transformed) to {out}")


@main.command()
@click.option("--chunks", "chunks_path", required=True, type=click.Path(exists=True))
@click.option("--backend-url", default=None)
@click.option("--model", default="llama-2-7b-chat")
@click.option("--stub-backend", is_flag=True, help="Use the deterministic offline backend.")
@click.option("--per-prompt-max", default=32, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--record-transcript", type=click.Path(), default=None)
@click.option("--replay-transcript", type=click.Path(exists=True), default=None)
@click.option("--out", required=True, type=click.Path())
def qagen(chunks_path: str, backend_url: str | None, model: str, stub_backend: bool,
          per_prompt_max: int, workers: int, record_transcript: str | None,
          replay_transcript: str | None, out: str) -> None:
    """Generate synthetic QA pairs for every chunk."""
    backend = _completion_backend(backend_url, model, stub_backend, replay_transcript)
    recorder = None
    if record_transcript:
        recorder = TranscriptRecorder(completion=backend)
        backend = recorder
    chunks = _load_chunks(chunks_path)
    stats = QaGenStats()
    pairs = generate_qa_corpus(chunks, backend, per_prompt_max=per_prompt_max,
                               max_workers=workers, stats=stats)
    n = export_qa_pairs(pairs, out)
    if recorder is not None:
        recorder.save(record_transcript)
    click.echo(
        f"wrote {n} pairs to {out} "
        f"({stats.chunks_done} chunks ok, {stats.chunks_failed} failed, "
        f"{stats.empty_responses} empty responses)"
    )


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--threshold", default=0.8, show_default=True)
@click.option("--shingle-size", default=3, show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--clusters", "clusters_path", required=True, type=click.Path())
def dedup(in_path: str, threshold: float, shingle_size: int, out: str, clusters_path: str) -> None:
    """Cluster near-duplicate questions and keep one representative each."""
    pairs = read_qa_pairs(in_path)
    cfg = SimilarityConfig(threshold=threshold, shingle_size=shingle_size)
    clusters = cluster_pairs(pairs, cfg)
    representatives = select_representatives(clusters, pairs)
    jsonl.write_jsonl(clusters_path, (cluster_to_record(c) for c in clusters))
    n = export_qa_pairs(representatives, out)
    click.echo(f"{len(pairs)} pairs -> {len(clusters)} clusters; wrote {n} representatives to {out}")


@main.command()
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True))
@click.option("--fim", "fim_path", required=True, type=click.Path(exists=True))
@click.option("--seed", required=True, type=int)
@click.option("--test-fraction", default=0.10, show_default=True)
@click.option("--by-cluster", is_flag=True, help="Keep whole dedup clusters on one side of the split.")
@click.option("--out-dir", required=True, type=click.Path())
def export(pairs_path: str, fim_path: str, seed: int, test_fraction: float,
           by_cluster: bool, out_dir: str) -> None:
    """Split the QA dataset and write instruction files plus the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pairs = read_qa_pairs(pairs_path)
    train, test = split_dataset(pairs, test_fraction=test_fraction, seed=seed, by_cluster=by_cluster)
    train_path, test_path = out / "instr_train.jsonl", out / "instr_test.jsonl"
    export_instruction_dataset([make_instruction_record(p) for p in train], train_path)
    export_instruction_dataset([make_instruction_record(p) for p in test], test_path)
    manifest = emit_training_manifest(
        overrides={},
        dataset_paths={"fim": fim_path, "instr_train": train_path, "instr_test": test_path},
        out_path=out / "manifest.json",
        seed=seed,
    )
    click.echo(f"split {len(pairs)} pairs -> {len(train)} train / {len(test)} test; "
               f"manifest at {out / 'manifest.json'} (fim_epochs={manifest.fim_epochs})")


@main.group()
def index() -> None:
    """Build or query the anchor embedding index."""


@index.command("build")
@click.option("--chunks", "chunks_path", required=True, type=click.Path(exists=True))
@click.option("--backend-url", default=None)
@click.option("--model", default="aoe-embeddings")
@click.option("--stub-backend", is_flag=True)
@click.option("--dim", default=64, show_default=True, help="Stub embedding dimension.")
@click.option("--out", required=True, type=click.Path())
def index_build(chunks_path: str, backend_url: str | None, model: str,
                stub_backend: bool, dim: int, out: str) -> None:
    chunks = _load_chunks(chunks_path)
    if stub_backend or not backend_url:
        backend = make_embedding_backend({"stub": True, "dim": dim})
    else:
        backend = make_embedding_backend({"endpoint": backend_url, "model": model, "dim": dim})
    anchor_set = build_anchor_set(chunks)
    idx = build_index(chunks, anchor_set, backend)
    idx.save(out)
    click.echo(f"indexed {len(idx)} chunks (dim {idx.dim}) to {out}")


@index.command("query")
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--query", "query_text", required=True)
@click.option("--k", default=5, show_default=True)
@click.option("--backend-url", default=None)
@click.option("--model", default="aoe-embeddings")
@click.option("--stub-backend", is_flag=True)
def index_query(index_path: str, query_text: str, k: int, backend_url: str | None,
                model: str, stub_backend: bool) -> None:
    idx = AnchorIndex.load(index_path)
    if stub_backend or not backend_url:
        backend = make_embedding_backend({"stub": True, "dim": idx.dim})
    else:
        backend = make_embedding_backend({"endpoint": backend_url, "model": model, "dim": idx.dim})
    for key, score in query_top_k(idx, query_text, RetrievalConfig(k=k), backend):
        click.echo(f"{score:.4f}\t{key}")


@main.command()
@click.option("--mode", type=click.Choice(MODES), required=True)
@click.option("--questions", "questions_path", required=True, type=click.Path(exists=True),
              help="JSON lines with at least {id, question}.")
@click.option("--index", "index_path", type=click.Path(exists=True), default=None)
@click.option("--chunks", "chunks_path", type=click.Path(exists=True), default=None)
@click.option("--k", default=5, show_default=True)
@click.option("--window", default=4000, show_default=True)
@click.option("--batch-size", default=16, show_default=True)
@click.option("--backend-url", default=None)
@click.option("--model", default="codellama-7b")
@click.option("--embed-backend-url", default=None, help="Embedding endpoint for retrieval; stub when omitted.")
@click.option("--embed-model", default="aoe-embeddings")
@click.option("--stub-backend", is_flag=True)
@click.option("--stub-delay", default=0.0, show_default=True, help="Stub answer delay in seconds.")
@click.option("--out", required=True, type=click.Path())
def infer(mode: str, questions_path: str, index_path: str | None, chunks_path: str | None,
          k: int, window: int, batch_size: int, backend_url: str | None, model: str,
          embed_backend_url: str | None, embed_model: str,
          stub_backend: bool, stub_delay: float, out: str) -> None:
    """Answer test questions in anchor-keyed, retrieval, or base mode."""
    questions = jsonl.load_jsonl(questions_path)
    if stub_backend or not backend_url:
        backend = StubAnswerBackend(delay_s=stub_delay)
    else:
        backend = make_completion_backend({"endpoint": backend_url, "model": model})

    bundles = []
    if mode == "base":
        bundles = [build_base_prompt(q["question"], query_id=str(q.get("id", i)))
                   for i, q in enumerate(questions)]
    else:
        if not index_path:
            raise click.ClickException(f"--index is required for mode {mode}")
        idx = AnchorIndex.load(index_path)
        if embed_backend_url:
            embed_backend = make_embedding_backend(
                {"endpoint": embed_backend_url, "model": embed_model, "dim": idx.dim})
        else:
            embed_backend = make_embedding_backend({"stub": True, "dim": idx.dim})
        chunk_by_key = {}
        if mode == "rag":
            if not chunks_path:
                raise click.ClickException("--chunks is required for mode rag")
            chunks = _load_chunks(chunks_path)
            anchor_set = build_anchor_set(chunks)
            keyed = anchor_set.by_chunk()
            chunk_by_key = {keyed[(c.file_path, c.ordinal)].key: c for c in chunks}
        for i, q in enumerate(questions):
            query_id = str(q.get("id", i))
            ranked = query_top_k(idx, q["question"], RetrievalConfig(k=k), embed_backend)
            keys = [key for key, _ in ranked]
            if mode == "kant":
                bundles.append(build_kant_prompt(q["question"], keys, query_id=query_id))
            else:
                ranked_chunks = [chunk_by_key[key] for key in keys if key in chunk_by_key]
                bundles.append(build_rag_prompt(q["question"], ranked_chunks, window=window,
                                                query_id=query_id))

    results = run_batch(bundles, backend, batch_size=batch_size)
    n = jsonl.write_jsonl(out, (result_to_record(r) for r in results))
    mean_tokens = sum(r.prompt_tokens for r in results) / n if n else 0.0
    click.echo(f"wrote {n} results to {out} (mean prompt tokens {mean_tokens:.1f})")


@main.group("eval")
def eval_group() -> None:
    """Human-evaluation study administration."""


@eval_group.command("sample")
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True))
@click.option("--n", "sample_n", default=None, type=int,
              help="Sample size; default from Cochran at the chosen confidence/margin.")
@click.option("--confidence", default=0.95, show_default=True)
@click.option("--margin", default=0.05, show_default=True)
@click.option("--seed", required=True, type=int)
@click.option("--out", required=True, type=click.Path())
def eval_sample(pairs_path: str, sample_n: int | None, confidence: float, margin: float,
                seed: int, out: str) -> None:
    """Draw the QA-quality review sample from deduplicated pairs."""
    pairs = read_qa_pairs(pairs_path)
    n = sample_n or required_sample_size(confidence, margin, population=len(pairs))
    sampled = sample_items(pairs, n, seed=seed)
    items = [
        EvalItem(
            item_id=f"qa-{i:05d}",
            kind=KIND_QA_QUALITY,
            payload={"question": p.question, "answer": p.answer, "pair_id": p.id},
        )
        for i, p in enumerate(sampled)
    ]
    jsonl.write_jsonl(out, (
        {"item_id": it.item_id, "kind": it.kind, "payload": it.payload} for it in items
    ))
    click.echo(f"sampled {len(items)} of {len(pairs)} pairs to {out}")


@eval_group.command("assign")
@click.option("--items", "items_path", required=True, type=click.Path(exists=True))
@click.option("--evaluators", required=True, help="Comma-separated evaluator ids.")
@click.option("--seed", required=True, type=int)
@click.option("--store", "store_dir", required=True, type=click.Path())
def eval_assign(items_path: str, evaluators: str, seed: int, store_dir: str) -> None:
    """Blind and assign items, then initialize the study store."""
    raw_items = [
        EvalItem(item_id=r["item_id"], kind=r["kind"], payload=r["payload"])
        for r in jsonl.read_jsonl(items_path)
    ]
    evaluator_ids = [e.strip() for e in evaluators.split(",") if e.strip()]
    assigned = draw_blinded_assignments(raw_items, evaluator_ids, seed=seed)
    store = EvalStore(store_dir)
    store.put_items(assigned, evaluators=evaluator_ids)
    counts: dict[str, int] = {}
    for item in assigned:
        counts[item.assigned_evaluator] = counts.get(item.assigned_evaluator, 0) + 1
    click.echo(f"assigned {len(assigned)} items: " +
               ", ".join(f"{e}={n}" for e, n in sorted(counts.items())))


@eval_group.command("report")
@click.option("--store", "store_dir", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None)
def eval_report(store_dir: str, out: str | None) -> None:
    """Aggregate the rating log into the summary report."""
    store = EvalStore(store_dir)
    report = aggregate(store.ratings)
    payload = report.to_record()
    if out:
        jsonl.write_json(out, payload)
        click.echo(f"wrote report to {out}")
    else:
        click.echo(json.dumps(payload, indent=2, ensure_ascii=False))


@eval_group.command("serve")
@click.option("--store", "store_dir", required=True, type=click.Path())
@click.option("--static-dir", type=click.Path(), default=None,
              help="Directory with the annotator web bundle.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8400, show_default=True)
def eval_serve(store_dir: str, static_dir: str | None, host: str, port: int) -> None:
    """Serve the annotation API (and UI bundle, if provided)."""
    import uvicorn

    store = EvalStore(store_dir)
    app = create_app(store, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--force", is_flag=True, help="Rerun every stage even if unchanged.")
def pipeline(config_path: str, seed: int | None, force: bool) -> None:
    """Run ingest -> anchors -> fim -> qagen -> dedup -> export -> index."""
    try:
        cfg = PipelineConfig.from_file(config_path)
        if seed is not None:
            cfg.seed = seed
        manifest = run_pipeline(cfg, force=force)
    except (ConfigError, PipelineError) as exc:
        raise click.ClickException(str(exc))
    click.echo(json.dumps(manifest, indent=2))


if __name__ == "__main__":
    main()
