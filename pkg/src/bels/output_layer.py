"""Output layers: incremental ridge regression over the broad features."""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .errors import ShapeMismatch
from .linalg import ridge_solve

__all__ = [
    "OutputLayer",
    "check_one_hot",
    "predict_scores",
    "score_accuracy",
    "train_many",
]

_ids = itertools.count()


def check_one_hot(y: np.ndarray, n_classes: int | None = None) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim != 2:
        raise ShapeMismatch(f"labels must be 2-D one-hot, got shape {y.shape}")
    if n_classes is not None and y.shape[1] != n_classes:
        raise ShapeMismatch(f"expected {n_classes} label columns, got {y.shape[1]}")
    if not (np.all((y == 0) | (y == 1)) and np.all(y.sum(axis=1) == 1)):
        raise ShapeMismatch("labels are not one-hot (one-hot violation)")
    return y


class OutputLayer:
    """One ensemble member.

    Keeps ``a_t = sum A_k.T A_k`` and ``d_t = sum A_k.T Y_k`` over the chunks
    it was trained on; ``w`` is always the ridge solution for those sums.
    """

    def __init__(self, width: int, n_classes: int, lambda_ridge: float = 1e-8, id: int | None = None):
        self.width = width
        self.n_classes = n_classes
        self.lambda_ridge = lambda_ridge
        self.a_t = np.zeros((width, width))
        self.d_t = np.zeros((width, n_classes))
        self.w = np.zeros((width, n_classes))
        self.chunks_trained = 0
        self.last_accuracy = 0.0
        self.id = next(_ids) if id is None else id

    @property
    def trained(self) -> bool:
        return self.chunks_trained > 0

    def accumulate(self, gram: np.ndarray, cross: np.ndarray) -> None:
        self.a_t += gram
        self.d_t += cross
        self.chunks_trained += 1

    def train(self, a: np.ndarray, y: np.ndarray) -> None:
        a = np.asarray(a, dtype=float)
        y = check_one_hot(y, self.n_classes)
        if a.ndim != 2 or a.shape[0] != y.shape[0] or a.shape[1] != self.width:
            raise ShapeMismatch(f"features {a.shape} do not match labels {y.shape} / width {self.width}")
        self.accumulate(a.T @ a, a.T @ y)
        self.w = ridge_solve(self.a_t, self.d_t, self.lambda_ridge)

    def predict_scores(self, a_test: np.ndarray) -> np.ndarray:
        return predict_scores(self.w, a_test)

    def __repr__(self) -> str:
        return f"OutputLayer(id={self.id}, chunks_trained={self.chunks_trained})"


def train_many(layers: Sequence[OutputLayer], a: np.ndarray, y: np.ndarray) -> None:
    """Train several layers on the same chunk with one batched solve.

    Gives the same result as calling ``layer.train(a, y)`` on each.
    """
    if not layers:
        return
    a = np.asarray(a, dtype=float)
    y = check_one_hot(y, layers[0].n_classes)
    if a.shape[0] != y.shape[0]:
        raise ShapeMismatch(f"features {a.shape} do not match labels {y.shape}")
    gram = a.T @ a
    cross = a.T @ y
    lam = layers[0].lambda_ridge
    for layer in layers:
        if layer.width != a.shape[1] or layer.lambda_ridge != lam:
            raise ShapeMismatch("layers in one batch must share width and lambda")
        layer.accumulate(gram, cross)
    ws = ridge_solve(np.stack([l.a_t for l in layers]), np.stack([l.d_t for l in layers]), lam)
    for layer, w in zip(layers, ws):
        layer.w = w


def predict_scores(w: np.ndarray, a_test: np.ndarray) -> np.ndarray:
    a_test = np.asarray(a_test, dtype=float)
    if a_test.shape[-1] != w.shape[-2]:
        raise ShapeMismatch(f"features {a_test.shape} do not match weights {w.shape}")
    return a_test @ w


def score_accuracy(scores: np.ndarray, y_true: np.ndarray) -> float:
    """Fraction of rows whose score argmax hits the true class; ties go to the lowest index."""
    scores = np.asarray(scores)
    y_true = np.asarray(y_true)
    if scores.shape[0] != y_true.shape[0]:
        raise ShapeMismatch(f"{scores.shape[0]} score rows vs {y_true.shape[0]} label rows")
    if scores.shape[0] == 0:
        return 0.0
    return float(np.mean(np.argmax(scores, axis=1) == np.argmax(y_true, axis=1)))
