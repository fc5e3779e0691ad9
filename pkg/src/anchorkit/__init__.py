"""Anchored training-data synthesis and retrieval toolkit.

Builds repository-grounded fill-in-the-middle and instruction-tuning datasets
keyed by knowledge anchors, serves anchor-conditioned inference prompts
against pluggable model backends, and runs a blinded human-evaluation
protocol over the results.
"""

from .anchors import AnchorSet, KnowledgeAnchor, build_anchor_set, derive_anchor, validate_anchor_set
from .backends import (
    BackendError,
    HttpCompletionBackend,
    HttpEmbeddingBackend,
    StubAnswerBackend,
    StubEmbeddingBackend,
    StubQaCompletionBackend,
    TranscriptRecorder,
    TranscriptReplayBackend,
)
from .dataset import (
    InstructionRecord,
    TrainingManifest,
    emit_training_manifest,
    export_fim_dataset,
    export_instruction_dataset,
    make_instruction_record,
    parse_instruction_input,
    split_dataset,
)
from .dedup import Cluster, SimilarityConfig, cluster_pairs, normalize_text, select_representatives, similarity
from .evaluation import (
    IntentLabel,
    Rating,
    SummaryReport,
    aggregate,
    draw_blinded_assignments,
    escalate,
    required_sample_size,
    required_sample_size_power,
)
from .fim import FimSample, RenderedSample, make_fim_sample, render_fim_text, rng_for_chunk
from .gateway import (
    EfficiencyReport,
    InferenceResult,
    PromptBundle,
    build_base_prompt,
    build_kant_prompt,
    build_rag_prompt,
    compare_efficiency,
    parse_kant_prompt,
    run_batch,
)
from .index import AnchorIndex, EmbeddingVector, RetrievalConfig, build_index, embed, query_top_k
from .ingest import (
    CodeChunk,
    FilterConfig,
    PositionDescriptor,
    SourceFile,
    chunk_file,
    chunk_repository,
    count_tokens,
    scan_repository,
)
from .qa import QaPair, build_generation_prompts, generate_qa, parse_qa_response

__version__ = "0.1.0"
