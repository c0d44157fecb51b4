"""An output layer trained incrementally equals one trained on everything.

Only two running sums are kept per layer, so a layer trained for hours
costs the same memory as one trained on a single chunk.
"""

import numpy as np

from bels import OutputLayer, score_accuracy

rng = np.random.default_rng(2)
feats = rng.standard_normal((500, 12))
labels = (feats[:, 0] - feats[:, 3] > 0).astype(int)
onehot = np.eye(2)[labels]

stepwise = OutputLayer(12, 2)
for a, y in zip(np.array_split(feats, 25), np.array_split(onehot, 25)):
    stepwise.train(a, y)
batch = OutputLayer(12, 2)
batch.train(feats, onehot)

print("max weight gap:", np.abs(stepwise.w - batch.w).max())
print("training accuracy:", score_accuracy(stepwise.predict_scores(feats), onehot))
