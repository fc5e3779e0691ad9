import pytest

from anchorkit.anchors import (
    AnchorSet,
    KnowledgeAnchor,
    build_anchor_set,
    derive_anchor,
    validate_anchor_set,
)
from anchorkit.ingest import FilterConfig, chunk_repository, scan_repository

from conftest import make_chunk


class TestDeriveAnchor:
    def test_single_chunk_file_key_is_path(self):
        anchor = derive_anchor("src/utils/math.py", 0)
        assert anchor.key == "src/utils/math.py"
        assert anchor.kind == "file"

    def test_later_chunk_gets_ordinal_suffix(self):
        anchor = derive_anchor("a/b.py", 2)
        assert anchor.key == "a/b.py#2"
        assert anchor.kind == "chunk"

    def test_idempotent(self):
        assert derive_anchor("x/y.py", 3) == derive_anchor("x/y.py", 3)

    def test_empty_path_rejected(self):
        with pytest.raises(ValueError):
            derive_anchor("", 0)

    def test_negative_ordinal_rejected(self):
        with pytest.raises(ValueError):
            derive_anchor("a.py", -1)

    def test_hierarchy_prefix(self):
        anchor = derive_anchor("pkg/sub/mod.py", 4)
        assert anchor.key.startswith("pkg/sub/")


class TestValidateAnchorSet:
    def test_duplicate_keys_reported(self):
        dup = KnowledgeAnchor(key="a.py", file_path="a.py", ordinal=0, kind="file")
        report = validate_anchor_set(AnchorSet(repo_id="r", anchors=[dup, dup]))
        assert report.duplicates == ["a.py"]
        assert not report.ok

    def test_valid_set_over_100_chunks(self):
        chunks = [make_chunk(f"v{i} = {i}\n", file_path=f"m/f{i % 25}.py", ordinal=i // 25)
                  for i in range(100)]
        anchor_set = build_anchor_set(chunks)
        report = validate_anchor_set(anchor_set, chunks)
        assert report.ok
        assert report.duplicates == [] and report.orphans == [] and report.unanchored == []

    def test_empty_set_empty_repo(self):
        report = validate_anchor_set(AnchorSet(repo_id="r", anchors=[]), chunks=[])
        assert report.ok

    def test_orphans_and_unanchored(self):
        chunk = make_chunk("x = 1\n", file_path="real.py", ordinal=0)
        orphan = KnowledgeAnchor(key="ghost.py", file_path="ghost.py", ordinal=0, kind="file")
        report = validate_anchor_set(AnchorSet(repo_id="r", anchors=[orphan]), chunks=[chunk])
        assert report.orphans == ["ghost.py"]
        assert report.unanchored == ["real.py:0"]

    def test_uniqueness_cardinality(self):
        chunks = [make_chunk("y = 2\n", file_path="p/big.py", ordinal=i) for i in range(7)]
        anchor_set = build_anchor_set(chunks)
        assert len(set(anchor_set.keys())) == len(chunks)


class TestStability:
    def test_content_edit_preserves_keys(self, tmp_path, fixture_repo_builder):
        fixture_repo_builder(tmp_path, 12, seed=5)
        files = scan_repository(tmp_path, FilterConfig())
        chunks = chunk_repository(files, budget=200)
        before = {(c.file_path, c.ordinal): derive_anchor(c.file_path, c.ordinal).key
                  for c in chunks}

        # Edit contents without changing any file's chunk count.
        target = tmp_path / files[0].repo_relative_path
        target.write_text(files[0].content.replace("=", "= 1 +", 1), encoding="utf-8")
        files2 = scan_repository(tmp_path, FilterConfig())
        chunks2 = chunk_repository(files2, budget=200)
        after = {(c.file_path, c.ordinal): derive_anchor(c.file_path, c.ordinal).key
                 for c in chunks2}
        assert before == after

    def test_growth_keeps_existing_keys(self):
        # A file growing from one chunk to two must not change the first key.
        assert derive_anchor("a.py", 0).key == "a.py"
        assert derive_anchor("a.py", 1).key == "a.py#1"
