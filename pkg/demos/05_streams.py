"""A look at the stream generators and the running standardizer."""

import numpy as np

from bels.streams import gaussian_clusters_stream, hyperplane_stream, led_stream, sea_stream

streams = {
    "sea 0,1,2": sea_stream([0, 1, 2], 2000, noise=0.1, seed=0),
    "hyperplane": hyperplane_stream(10, 1e-3, seed=0, n_samples=6000),
    "led": led_stream(7, 0.1, seed=0, n_samples=6000, drift_at=3000),
    "gaussian swap": gaussian_clusters_stream([[-1, -1], [1, 1]], 0.5, 2000, seed=0, n_segments=3),
}
for name, s in streams.items():
    x, y = s.materialize()
    share = np.bincount(y, minlength=s.n_classes) / len(y)
    print(f"{name:14s} d={s.d:2d} classes={s.n_classes:2d} samples={len(y)}  class shares {np.round(share, 2)}")

# standardization only uses what has already been seen
raw, _ = sea_stream([0], 3000, seed=0).materialize()
std, _ = sea_stream([0], 3000, seed=0, standardize=True).materialize()
print("raw tail mean/std:", raw[-1000:].mean(0).round(2), raw[-1000:].std(0).round(2))
print("standardized tail mean/std:", std[-1000:].mean(0).round(2), std[-1000:].std(0).round(2))
