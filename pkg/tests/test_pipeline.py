import json

import pytest
from click.testing import CliRunner

from anchorkit import jsonl
from anchorkit.cli import main
from anchorkit.config import ConfigError, PipelineConfig
from anchorkit.pipeline import ARTIFACTS, run_pipeline

from conftest import build_fixture_repo


def _config(repo_root, out_dir, seed=101, **extra) -> PipelineConfig:
    raw = {
        "repo_root": str(repo_root),
        "out_dir": str(out_dir),
        "seed": seed,
        "chunk_tokens": 120,
        "per_prompt_max": 4,
        "embedding": {"stub": True, "dim": 16},
        "completion": {"stub": True, "pairs": 3},
        **extra,
    }
    return PipelineConfig.from_dict(raw)


def _artifact_bytes(out_dir) -> dict[str, bytes]:
    return {name: (out_dir / filename).read_bytes() for name, filename in ARTIFACTS.items()}


class TestPipelineConfig:
    def test_missing_field_named(self, tmp_path):
        with pytest.raises(ConfigError, match="seed"):
            PipelineConfig.from_dict({"repo_root": str(tmp_path), "out_dir": str(tmp_path)})

    def test_invalid_value_named(self, tmp_path):
        with pytest.raises(ConfigError, match="fim_rate"):
            _config(tmp_path, tmp_path / "out", fim_rate=1.5)

    def test_defaults_follow_training_settings(self, tmp_path):
        cfg = PipelineConfig.from_dict(
            {"repo_root": str(tmp_path), "out_dir": str(tmp_path / "o"), "seed": 1})
        assert cfg.chunk_tokens == 3000
        assert cfg.fim_rate == 0.5
        assert cfg.top_k == 5
        assert cfg.context_window_size == 4000
        assert cfg.batch_size == 16
        assert cfg.dedup.threshold == 0.8


class TestRunPipeline:
    def test_full_artifact_set(self, tmp_path):
        repo = tmp_path / "repo"
        repo.mkdir()
        build_fixture_repo(repo, 20, seed=3)
        out = tmp_path / "out"
        manifest = run_pipeline(_config(repo, out))
        for name, filename in ARTIFACTS.items():
            assert (out / filename).is_file(), f"missing artifact {name}"
            assert name in manifest["artifacts"]
        chunks = jsonl.load_jsonl(out / "chunks.jsonl")
        qa = jsonl.load_jsonl(out / "qa_raw.jsonl")
        assert chunks and qa
        # One FIM sample per chunk per pass.
        fim_rows = jsonl.load_jsonl(out / "fim.jsonl")
        assert len(fim_rows) == len(chunks)
        train = jsonl.load_jsonl(out / "instr_train.jsonl")
        test = jsonl.load_jsonl(out / "instr_test.jsonl")
        deduped = jsonl.load_jsonl(out / "qa_dedup.jsonl")
        assert len(train) + len(test) == len(deduped)

    def test_deterministic_across_directories(self, tmp_path):
        repo = tmp_path / "repo"
        repo.mkdir()
        build_fixture_repo(repo, 15, seed=8)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        run_pipeline(_config(repo, out1))
        run_pipeline(_config(repo, out2))
        b1, b2 = _artifact_bytes(out1), _artifact_bytes(out2)
        assert b1 == b2

    def test_rerun_skips_via_checksums(self, tmp_path, caplog):
        repo = tmp_path / "repo"
        repo.mkdir()
        build_fixture_repo(repo, 8, seed=1)
        out = tmp_path / "out"
        run_pipeline(_config(repo, out))
        state_before = (out / "pipeline_state.json").read_bytes()
        import logging
        with caplog.at_level(logging.INFO, logger="anchorkit.pipeline"):
            run_pipeline(_config(repo, out))
        skips = [r for r in caplog.records if "skipping" in r.message]
        assert len(skips) == 7
        assert (out / "pipeline_state.json").read_bytes() == state_before

    def test_record_then_replay_identical(self, tmp_path):
        repo = tmp_path / "repo"
        repo.mkdir()
        build_fixture_repo(repo, 10, seed=4)
        transcript = tmp_path / "transcript.jsonl"
        out1, out2 = tmp_path / "rec", tmp_path / "rep"
        run_pipeline(_config(repo, out1, transcript={"record": str(transcript)}))
        assert transcript.is_file()
        run_pipeline(_config(repo, out2, transcript={"replay": str(transcript)}))
        assert _artifact_bytes(out1) == _artifact_bytes(out2)

    def test_stage_failure_names_stage(self, tmp_path):
        repo = tmp_path / "repo"
        repo.mkdir()
        build_fixture_repo(repo, 4, seed=2)
        from anchorkit.pipeline import PipelineError

        class Boom:
            def complete(self, prompt):
                from anchorkit.backends import BackendError
                raise BackendError("down")

            def embed(self, texts):
                raise RuntimeError("down")

        cfg = _config(repo, tmp_path / "out")
        import anchorkit.pipeline as pl
        orig = pl.wire_backends
        pl.wire_backends = lambda c: (Boom(), Boom(), None)
        try:
            with pytest.raises(PipelineError, match="stage index failed"):
                run_pipeline(cfg)
        finally:
            pl.wire_backends = orig


class TestCli:
    def _run(self, *args):
        runner = CliRunner()
        result = runner.invoke(main, list(args), catch_exceptions=False)
        assert result.exit_code == 0, result.output
        return result

    def test_stagewise_cli_chain(self, tmp_path):
        repo = tmp_path / "repo"
        repo.mkdir()
        build_fixture_repo(repo, 6, seed=9)
        d = tmp_path

        self._run("ingest", "--root", str(repo), "--chunk-tokens", "150",
                  "--out", str(d / "chunks.jsonl"))
        self._run("anchors", "--chunks", str(d / "chunks.jsonl"),
                  "--out", str(d / "anchors.jsonl"))
        self._run("fim", "--chunks", str(d / "chunks.jsonl"), "--seed", "5",
                  "--out", str(d / "fim.jsonl"))
        self._run("qagen", "--chunks", str(d / "chunks.jsonl"), "--stub-backend",
                  "--per-prompt-max", "3", "--out", str(d / "qa_raw.jsonl"))
        self._run("dedup", "--in", str(d / "qa_raw.jsonl"), "--threshold", "0.8",
                  "--out", str(d / "qa_dedup.jsonl"), "--clusters", str(d / "clusters.jsonl"))
        self._run("export", "--pairs", str(d / "qa_dedup.jsonl"), "--fim", str(d / "fim.jsonl"),
                  "--seed", "5", "--out-dir", str(d / "exp"))
        self._run("index", "build", "--chunks", str(d / "chunks.jsonl"), "--stub-backend",
                  "--dim", "16", "--out", str(d / "anchors.idx"))
        result = self._run("index", "query", "--index", str(d / "anchors.idx"),
                           "--query", "how is the cache drained", "--k", "3", "--stub-backend")
        assert len(result.output.strip().splitlines()) == 3

        questions = [{"id": f"q{i}", "question": f"what does module {i} do?"} for i in range(4)]
        jsonl.write_jsonl(d / "questions.jsonl", questions)
        for mode in ("kant", "rag", "base"):
            extra = []
            if mode != "base":
                extra += ["--index", str(d / "anchors.idx")]
            if mode == "rag":
                extra += ["--chunks", str(d / "chunks.jsonl")]
            self._run("infer", "--mode", mode, "--questions", str(d / "questions.jsonl"),
                      "--stub-backend", "--out", str(d / f"results_{mode}.jsonl"), *extra)
            rows = jsonl.load_jsonl(d / f"results_{mode}.jsonl")
            assert len(rows) == 4
            assert all(r["mode"] == mode for r in rows)

    def test_eval_cli_chain(self, tmp_path):
        repo = tmp_path / "repo"
        repo.mkdir()
        build_fixture_repo(repo, 5, seed=6)
        d = tmp_path
        self._run("ingest", "--root", str(repo), "--chunk-tokens", "150",
                  "--out", str(d / "chunks.jsonl"))
        self._run("qagen", "--chunks", str(d / "chunks.jsonl"), "--stub-backend",
                  "--per-prompt-max", "3", "--out", str(d / "qa_raw.jsonl"))
        self._run("dedup", "--in", str(d / "qa_raw.jsonl"),
                  "--out", str(d / "qa_dedup.jsonl"), "--clusters", str(d / "clusters.jsonl"))
        self._run("eval", "sample", "--pairs", str(d / "qa_dedup.jsonl"), "--n", "6",
                  "--seed", "3", "--out", str(d / "items.jsonl"))
        items = jsonl.load_jsonl(d / "items.jsonl")
        assert len(items) == 6
        result = self._run("eval", "assign", "--items", str(d / "items.jsonl"),
                           "--evaluators", "e1,e2,e3", "--seed", "3",
                           "--store", str(d / "store"))
        assert "e1=2" in result.output
        result = self._run("eval", "report", "--store", str(d / "store"))
        assert json.loads(result.output)["total_ratings"] == 0

    def test_pipeline_cli(self, tmp_path):
        repo = tmp_path / "repo"
        repo.mkdir()
        build_fixture_repo(repo, 6, seed=2)
        config = {
            "repo_root": str(repo),
            "out_dir": str(tmp_path / "out"),
            "seed": 3,
            "chunk_tokens": 150,
            "per_prompt_max": 2,
            "completion": {"stub": True},
            "embedding": {"stub": True, "dim": 8},
        }
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(config))
        result = self._run("pipeline", "--config", str(config_path))
        manifest = json.loads(result.output)
        assert set(manifest["artifacts"]) == set(ARTIFACTS)

    def test_pipeline_cli_bad_config(self, tmp_path):
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps({"repo_root": str(tmp_path)}))
        runner = CliRunner()
        result = runner.invoke(main, ["pipeline", "--config", str(config_path)])
        assert result.exit_code != 0
        assert "out_dir" in result.output
