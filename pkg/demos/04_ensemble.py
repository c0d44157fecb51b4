"""Watching the ensemble react to an abrupt drift.

SEA concept 0 switches to concept 3 halfway through. The number of active
members, the pool size and the removal threshold are printed every 50
chunks. Members that fall below the threshold on a chunk are replaced, so
the ensemble keeps turning over under label noise as well as after drift.
"""

from bels import BelsConfig, BelsModel
from bels.streams import sea_stream

stream = sea_stream([0, 3], 5000, noise=0.1, seed=4, standardize=True)
model = BelsModel(BelsConfig(n=25, m=1, chunk_size=10, m_o=20, m_p=40, seed=4), stream.d, stream.n_classes)

correct = seen = 0
for k, chunk in enumerate(stream.chunks(10)):
    pred = model.predict(chunk.x)
    model.learn(chunk.x, chunk.y)
    correct += int((pred == chunk.labels).sum())
    seen += len(pred)
    if k % 50 == 49:
        ens = model.ensemble
        print(
            f"{seen:6d} samples  acc {correct / seen:.3f}  active {len(ens.active):2d}  "
            f"pool {len(ens.pool):2d}  delta {ens.delta:.3f}  created {model.instances_created}"
        )
