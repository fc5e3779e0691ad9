"""Shared pipeline configuration loaded from a single JSON file."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .backends import (
    HttpCompletionBackend,
    HttpEmbeddingBackend,
    StubEmbeddingBackend,
    StubQaCompletionBackend,
    TranscriptRecorder,
    TranscriptReplayBackend,
)
from .dedup import SimilarityConfig


class ConfigError(Exception):
    pass


@dataclass
class PipelineConfig:
    repo_root: str
    out_dir: str
    seed: int
    chunk_tokens: int = 3000
    fim_rate: float = 0.5
    per_prompt_max: int = 32
    test_fraction: float = 0.10
    top_k: int = 5
    context_window_size: int = 4000
    batch_size: int = 16
    dedup: SimilarityConfig = field(default_factory=SimilarityConfig)
    completion: dict = field(default_factory=lambda: {"stub": True})
    embedding: dict = field(default_factory=lambda: {"stub": True, "dim": 64})
    transcript: dict = field(default_factory=dict)  # {"record": path} or {"replay": path}

    REQUIRED = ("repo_root", "out_dir", "seed")

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "PipelineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        for name in cls.REQUIRED:
            if name not in raw:
                raise ConfigError(f"missing required config field: {name}")
        dedup_raw = raw.get("dedup", {})
        try:
            dedup = SimilarityConfig(
                threshold=dedup_raw.get("threshold", 0.8),
                shingle_size=dedup_raw.get("shingle_size", 3),
                minhash_permutations=dedup_raw.get("minhash_permutations", 128),
                lsh_bands=dedup_raw.get("lsh_bands", 32),
            )
        except ValueError as exc:
            raise ConfigError(f"invalid dedup config: {exc}")
        cfg = cls(
            repo_root=raw["repo_root"],
            out_dir=raw["out_dir"],
            seed=int(raw["seed"]),
            chunk_tokens=raw.get("chunk_tokens", 3000),
            fim_rate=raw.get("fim_rate", 0.5),
            per_prompt_max=raw.get("per_prompt_max", 32),
            test_fraction=raw.get("test_fraction", 0.10),
            top_k=raw.get("top_k", 5),
            context_window_size=raw.get("context_window_size", 4000),
            batch_size=raw.get("batch_size", 16),
            dedup=dedup,
            completion=raw.get("completion", {"stub": True}),
            embedding=raw.get("embedding", {"stub": True, "dim": 64}),
            transcript=raw.get("transcript", {}),
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.chunk_tokens <= 0:
            raise ConfigError("invalid config field: chunk_tokens must be positive")
        if not 0.0 <= self.fim_rate <= 1.0:
            raise ConfigError("invalid config field: fim_rate must be in [0, 1]")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("invalid config field: test_fraction must be in (0, 1)")
        if self.top_k < 1:
            raise ConfigError("invalid config field: top_k must be at least 1")
        if self.context_window_size <= 0:
            raise ConfigError("invalid config field: context_window_size must be positive")
        if self.batch_size < 1:
            raise ConfigError("invalid config field: batch_size must be at least 1")
        if not Path(self.repo_root).is_dir():
            raise ConfigError(f"invalid config field: repo_root does not exist: {self.repo_root}")

    def stage_fingerprint(self) -> dict:
        """Stable digest inputs for stage-skip checks."""
        return {
            "seed": self.seed,
            "chunk_tokens": self.chunk_tokens,
            "fim_rate": self.fim_rate,
            "per_prompt_max": self.per_prompt_max,
            "test_fraction": self.test_fraction,
            "top_k": self.top_k,
            "context_window_size": self.context_window_size,
            "batch_size": self.batch_size,
            "dedup": {
                "threshold": self.dedup.threshold,
                "shingle_size": self.dedup.shingle_size,
                "minhash_permutations": self.dedup.minhash_permutations,
                "lsh_bands": self.dedup.lsh_bands,
            },
            "completion": self.completion,
            "embedding": self.embedding,
        }


def make_completion_backend(spec: dict):
    if spec.get("stub"):
        return StubQaCompletionBackend(
            pairs=spec.get("pairs", 3),
            seed=spec.get("seed", 0),
        )
    if "endpoint" not in spec or "model" not in spec:
        raise ConfigError("completion backend needs endpoint and model (or stub: true)")
    return HttpCompletionBackend(
        endpoint=spec["endpoint"],
        model=spec["model"],
        temperature=spec.get("temperature", 0.7),
        max_tokens=spec.get("max_tokens", 1024),
        timeout=spec.get("timeout", 60.0),
        max_retries=spec.get("max_retries", 3),
        headers=spec.get("headers"),
    )


def make_embedding_backend(spec: dict):
    if spec.get("stub"):
        return StubEmbeddingBackend(dim=spec.get("dim", 64), seed=spec.get("seed", 0))
    if "endpoint" not in spec or "model" not in spec:
        raise ConfigError("embedding backend needs endpoint and model (or stub: true)")
    return HttpEmbeddingBackend(
        endpoint=spec["endpoint"],
        model=spec["model"],
        dim=spec.get("dim", 0),
        timeout=spec.get("timeout", 60.0),
        max_retries=spec.get("max_retries", 3),
        headers=spec.get("headers"),
    )


def wire_backends(cfg: PipelineConfig):
    """Build (completion, embedding, recorder) per the transcript settings.

    Replay mode ignores the live backend settings entirely; record mode wraps
    both backends in a recorder whose transcript must be saved by the caller.
    """
    if cfg.transcript.get("replay"):
        replay = TranscriptReplayBackend(cfg.transcript["replay"])
        return replay, replay, None
    completion = make_completion_backend(cfg.completion)
    embedding = make_embedding_backend(cfg.embedding)
    if cfg.transcript.get("record"):
        recorder = TranscriptRecorder(completion=completion, embedding=embedding)
        return recorder, recorder, recorder
    return completion, embedding, None
