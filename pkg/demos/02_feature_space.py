"""Mapped and enhancement features built chunk by chunk.

Statistics are accumulated over chunks, so feeding the data in pieces or
all at once yields the same sparse map.
"""

import numpy as np

from bels import FeatureSpace

rng = np.random.default_rng(1)
x = rng.uniform(-1, 1, size=(300, 4))

space = FeatureSpace(4, 10, 5, 20, 2, seed=7)
for part in np.array_split(x, 6):
    space.update(part)
whole = FeatureSpace(4, 10, 5, 20, 2, seed=7)
whole.update(x)

print("feature width:", space.width)
print("same sparse map either way:", np.allclose(space.mu, whole.mu))
feats = space.transform(x[:5])
print("first rows of the feature matrix:\n", np.round(feats[:, :8], 3))
