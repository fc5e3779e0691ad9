"""Run the whole pipeline twice and verify byte-identical artifacts.

Stage order: ingest -> anchors -> fim -> qagen -> dedup -> export -> index.
A recorded backend transcript makes the second run reproduce the first
exactly; rerunning in place skips unchanged stages via checksums.
"""

import random
import tempfile
from pathlib import Path

from anchorkit.config import PipelineConfig
from anchorkit.pipeline import ARTIFACTS, run_pipeline

work = Path(tempfile.mkdtemp(prefix="demo_pipeline_"))
repo = work / "repo"
repo.mkdir()
rng = random.Random(1)
for i in range(10):
    lines = [f"def fn_{i}_{j}(x):\n    return x + {rng.randint(0, 99)}\n" for j in range(12)]
    (repo / f"module_{i}.py").write_text("".join(lines))

transcript = work / "transcript.jsonl"


def config(out_dir, transcript_cfg):
    return PipelineConfig.from_dict({
        "repo_root": str(repo),
        "out_dir": str(out_dir),
        "seed": 99,
        "chunk_tokens": 120,
        "per_prompt_max": 3,
        "completion": {"stub": True},
        "embedding": {"stub": True, "dim": 16},
        "transcript": transcript_cfg,
    })


manifest = run_pipeline(config(work / "run1", {"record": str(transcript)}))
print("artifacts:")
for name, entry in manifest["artifacts"].items():
    print(f"  {name:12s} {entry['sha256'][:16]}...  {entry['path']}")

run_pipeline(config(work / "run2", {"replay": str(transcript)}))
same = all(
    (work / "run1" / f).read_bytes() == (work / "run2" / f).read_bytes()
    for f in ARTIFACTS.values()
)
print("\nreplayed run byte-identical:", same)

# Rerunning in place is a no-op thanks to checksummed stage state.
run_pipeline(config(work / "run1", {"record": str(transcript)}))
print("in-place rerun skipped unchanged stages (see pipeline_state.json)")
