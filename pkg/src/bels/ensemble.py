"""The broad ensemble: one shared feature space, many output layers.

Each chunk goes through a fixed cycle:

1. membership maintenance (grow, drop low scorers, re-admit from the pool),
2. test every trained member on the chunk,
3. hard vote,
4. audit the pool of dropped members,
5. update the feature space and train every active member.

:meth:`BelsModel.predict` runs steps 1-3 without labels and
:meth:`BelsModel.learn` finishes the cycle once the labels are revealed.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import InvalidConfig, ShapeMismatch
from .features import FeatureSpace
from .output_layer import OutputLayer, check_one_hot, train_many

__all__ = [
    "VARIANTS",
    "PRESETS",
    "BelsConfig",
    "BelsModel",
    "ChunkResult",
    "EnsemblePoolState",
    "preset",
    "run_variant",
    "vote",
]

VARIANTS = ("BLS", "BELS-FPs", "BELS-Ens", "BELS")

# (n, m) for the three standard model sizes
PRESETS = {"BELS1": (25, 1), "BELS2": (25, 50), "BELS3": (100, 100)}


@dataclass(frozen=True)
class BelsConfig:
    n: int = 25
    m: int = 1
    g: int = 1
    h: int = 1
    chunk_size: int = 10
    m_o: int = 75
    m_p: int = 300
    eta: float = 0.5
    delta_init: float = 0.5
    lambda_ridge: float = 1e-8
    rho: float = 1.0
    admm_iters: int = 50
    kappa: float = 1e-3
    shrink: float = 1.0
    bias: float = 0.1
    seed: int = 0
    variant: str = "BELS"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidConfig(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.chunk_size < 1 or self.m_o < 1 or self.m_p < 0:
            raise InvalidConfig("chunk_size >= 1, m_o >= 1 and m_p >= 0 required")
        if self.n < 1 or self.g < 1 or self.m < 0 or self.h < 0:
            raise InvalidConfig("n, g >= 1 and m, h >= 0 required")
        for name in ("eta", "delta_init"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidConfig(f"{name} must lie in [0, 1]")
        if self.lambda_ridge < 0 or self.rho <= 0 or self.kappa < 0 or self.admm_iters < 1:
            raise InvalidConfig("lambda_ridge >= 0, rho > 0, kappa >= 0, admm_iters >= 1 required")

    @property
    def width(self) -> int:
        return self.n * self.g + self.m * self.h

    def replace(self, **changes) -> "BelsConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


def preset(name: str, **overrides) -> BelsConfig:
    """``preset("BELS2", chunk_size=10)`` -> config with that preset's n and m."""
    try:
        n, m = PRESETS[name]
    except KeyError:
        raise InvalidConfig(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}") from None
    return BelsConfig(n=n, m=m, **overrides)


@dataclass
class EnsemblePoolState:
    active: list[OutputLayer] = field(default_factory=list)
    pool: list[OutputLayer] = field(default_factory=list)
    candidates: list[int] = field(default_factory=list)
    removal_list: list[int] = field(default_factory=list)
    delta: float = 0.5
    eta: float = 0.5
    m_o: int = 75
    m_p: int = 300
    overall_correct: int = 0
    overall_seen: int = 0

    @property
    def overall_accuracy(self) -> float:
        return self.overall_correct / self.overall_seen if self.overall_seen else 0.0


@dataclass
class ChunkResult:
    ensemble_prediction: np.ndarray
    ensemble_accuracy: float
    per_instance_accuracy: list[float]


def vote(per_instance_scores: Sequence[np.ndarray], n_classes: int) -> np.ndarray:
    """Hard majority vote; each matrix casts one vote per row, ties go to the lowest class."""
    if len(per_instance_scores) == 0:
        raise ShapeMismatch("vote needs at least one score matrix")
    scores = np.asarray(per_instance_scores)
    if scores.ndim != 3 or scores.shape[2] != n_classes:
        raise ShapeMismatch(f"score matrices must all be (rows, {n_classes}), got {scores.shape}")
    ballots = np.argmax(scores, axis=2)  # (members, rows)
    counts = (ballots[:, :, None] == np.arange(n_classes)).sum(axis=0)
    return np.argmax(counts, axis=1)


class BelsModel:
    """Streaming classifier over ``d`` features and ``n_classes`` labels.

    The ``variant`` in ``config`` selects the ablation:

    - ``BLS``: one output layer, sparse map fitted on the first chunk only.
    - ``BELS-FPs``: one output layer, feature space refreshed every chunk.
    - ``BELS-Ens``: the ensemble, but dropped members are discarded.
    - ``BELS``: the ensemble with the pool of dropped members.
    """

    def __init__(self, config: BelsConfig, d: int, n_classes: int):
        if n_classes < 2:
            raise InvalidConfig("need at least two classes")
        self.config = config
        self.d = d
        self.n_classes = n_classes
        self.feature_space = FeatureSpace(
            d,
            config.n,
            config.m,
            config.g,
            config.h,
            config.seed,
            rho=config.rho,
            kappa=config.kappa,
            admm_iters=config.admm_iters,
            shrink=config.shrink,
            bias=config.bias,
            accumulate=config.variant != "BLS",
        )
        single = config.variant in ("BLS", "BELS-FPs")
        self.ensemble = EnsemblePoolState(
            delta=config.delta_init,
            eta=config.eta,
            m_o=1 if single else config.m_o,
            m_p=config.m_p if config.variant == "BELS" else 0,
        )
        self.next_instance_id = 0
        self.instances_created = 0
        self.chunks_processed = 0
        self._pending: dict | None = None

    @property
    def single(self) -> bool:
        return self.config.variant in ("BLS", "BELS-FPs")

    @property
    def uses_pool(self) -> bool:
        return self.config.variant == "BELS"

    def _new_layer(self) -> OutputLayer:
        layer = OutputLayer(
            self.feature_space.width, self.n_classes, self.config.lambda_ridge, id=self.next_instance_id
        )
        self.next_instance_id += 1
        self.instances_created += 1
        return layer

    # -- step 1 -----------------------------------------------------------
    def _maintain(self) -> None:
        # Growth and pruning are exclusive: while the ensemble is below M_o a
        # newcomer is added and nothing is removed; once full, members that
        # scored below delta on the last chunk leave and the pool refills.
        ens = self.ensemble
        if len(ens.active) < ens.m_o:
            ens.active.append(self._new_layer())
        elif not self.single:
            doomed = [ens.active[i] for i in ens.removal_list]
            many_failed = len(doomed) > len(ens.active) // 2
            doomed_ids = {l.id for l in doomed}
            ens.active = [l for l in ens.active if l.id not in doomed_ids]
            if many_failed and self.uses_pool:
                ens.pool.extend(doomed)
            by_id = {l.id: l for l in ens.pool}
            readmit = []
            for cid in ens.candidates:
                if len(ens.active) + len(readmit) >= ens.m_o:
                    break
                if cid in by_id:
                    readmit.append(by_id.pop(cid))
            gone = {l.id for l in readmit}
            ens.pool = [l for l in ens.pool if l.id not in gone]
            ens.active.extend(readmit)
            if len(ens.pool) > ens.m_p:
                ens.pool = ens.pool[len(ens.pool) - ens.m_p :]
        if not ens.active:
            ens.active.append(self._new_layer())
        ens.removal_list = []
        ens.candidates = []

    # -- steps 1-3 --------------------------------------------------------
    def predict(self, x) -> np.ndarray:
        """Class predictions for chunk ``x``; must be followed by :meth:`learn`."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.d:
            raise ShapeMismatch(f"expected (rows, {self.d}) chunk, got {x.shape}")
        if self._pending is not None:
            raise RuntimeError("predict called twice without learn")
        self._maintain()
        ens = self.ensemble
        a_test = self.feature_space.transform(x)
        tested = [l for l in ens.active if l.trained]
        if tested:
            scores = a_test @ np.stack([l.w for l in tested])  # (members, rows, C)
            pred = vote(scores, self.n_classes)
        else:
            scores = np.zeros((0, x.shape[0], self.n_classes))
            pred = np.zeros(x.shape[0], dtype=int)
        pool_scores = a_test @ np.stack([l.w for l in ens.pool]) if ens.pool else None
        self._pending = {
            "x": x,
            "tested": tested,
            "scores": scores,
            "pred": pred,
            "pool": list(ens.pool),
            "pool_scores": pool_scores,
        }
        return pred

    # -- steps 3-5 --------------------------------------------------------
    def learn(self, x, y) -> ChunkResult:
        """Score the pending prediction against ``y`` (one-hot or class indices), then train."""
        if self._pending is None:
            raise RuntimeError("learn called before predict")
        pending, self._pending = self._pending, None
        x = pending["x"]
        y = self._as_one_hot(y, x.shape[0])
        truth = np.argmax(y, axis=1)
        ens = self.ensemble

        per_acc = [float(a) for a in np.mean(np.argmax(pending["scores"], axis=2) == truth, axis=1)]
        if self.config.chunk_size != 2:
            ens.delta = ens.overall_accuracy if ens.overall_seen else self.config.delta_init
        index = {l.id: i for i, l in enumerate(ens.active)}
        removal = []
        for layer, acc in zip(pending["tested"], per_acc):
            layer.last_accuracy = acc
            if acc < ens.delta:
                removal.append(index[layer.id])
        ens.removal_list = [] if self.single else sorted(removal)

        pred = pending["pred"]
        correct = int(np.sum(pred == truth))
        ens.overall_correct += correct
        ens.overall_seen += len(truth)
        if self.config.chunk_size != 2:
            ens.delta = ens.overall_accuracy

        if pending["pool_scores"] is not None:
            pool_acc = np.mean(np.argmax(pending["pool_scores"], axis=2) == truth, axis=1)
            ens.candidates = [l.id for l, a in zip(pending["pool"], pool_acc) if a > ens.eta]
        else:
            ens.candidates = []

        a_k = self.feature_space.update(x)
        train_many(ens.active, a_k, y)
        self.chunks_processed += 1
        return ChunkResult(pred, correct / len(truth), per_acc)

    def process_chunk(self, x, y) -> ChunkResult:
        self.predict(x)
        return self.learn(x, y)

    def _as_one_hot(self, y, rows: int) -> np.ndarray:
        y = np.asarray(y)
        if y.ndim == 1:
            if y.shape[0] != rows or np.any((y < 0) | (y >= self.n_classes)):
                raise ShapeMismatch("class indices do not match the chunk")
            return np.eye(self.n_classes)[y.astype(int)]
        if y.shape[0] != rows:
            raise ShapeMismatch(f"{y.shape[0]} label rows for a {rows}-row chunk")
        return check_one_hot(y, self.n_classes)


def run_variant(config: BelsConfig, stream, window: int = 1000):
    """Build a model for ``config.variant`` and run it prequentially over ``stream``."""
    from .prequential import evaluate

    if config.variant not in VARIANTS:
        raise InvalidConfig(f"unknown variant {config.variant!r}")
    model = BelsModel(config, stream.d, stream.n_classes)
    return evaluate(model, stream, window=window, chunk_size=config.chunk_size)
