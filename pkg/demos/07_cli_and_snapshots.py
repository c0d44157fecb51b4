"""Driving the command line and resuming from a snapshot.

Runs a short LED experiment through ``bels run`` with snapshots enabled,
then loads the snapshot and finishes the stream by hand.
"""

import tempfile
from pathlib import Path

import yaml

from bels import evaluate, load_snapshot
from bels.cli import main
from bels.config import build_stream, load_config

work = Path(tempfile.mkdtemp())
spec = yaml.safe_load((Path(__file__).parent / "configs" / "led_small.yaml").read_text())
spec.update(output_dir=str(work / "out"), snapshot_every=300)
cfg_path = work / "led.yaml"
cfg_path.write_text(yaml.safe_dump(spec))

main(["run", str(cfg_path), "--quiet"])
out = work / "out"
print((out / "manifest.txt").read_text())
print("series rows:", len((out / "series.csv").read_text().splitlines()) - 2)

model, harness = load_snapshot(out / "snapshot.npz")
print(f"snapshot taken after chunk {harness.next_chunk - 1}, {harness.seen} samples seen")
cfg = load_config(cfg_path)
series = evaluate(model, build_stream(cfg.stream, cfg.seed), cfg.window, model.config.chunk_size, state=harness)
print(f"resumed run final accuracy {series.final_accuracy:.4f}")
