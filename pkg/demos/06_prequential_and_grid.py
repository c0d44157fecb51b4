"""Test-then-train evaluation, grid selection, and the four variants.

The grid is searched on the first 1000 samples only; the winner then runs
on the full stream, once per variant.
"""

from bels import BelsConfig, grid_select, run_variant
from bels.prequential import default_grid, head_size
from bels.streams import sea_stream

stream = sea_stream([0, 2], 10_000, noise=0.1, seed=1, standardize=True)
best, results = grid_select(stream.head(head_size(len(stream))), default_grid(BelsConfig(m_o=25, seed=1)))
for cfg, acc, _ in results:
    print(f"  n={cfg.n:3d} m={cfg.m:3d} chunk={cfg.chunk_size:2d}  head accuracy {acc:.3f}")
print(f"selected n={best.n} m={best.m} chunk={best.chunk_size}")

for variant in ("BLS", "BELS-FPs", "BELS-Ens", "BELS"):
    series = run_variant(best.replace(variant=variant), stream, window=1000)
    print(f"{variant:9s} accuracy {series.final_accuracy:.4f}  {series.total_runtime_centiseconds_per_1000:.1f} cs/1000")
