"""Shared feature-mapping and enhancement layers.

A single :class:`FeatureSpace` feeds every output layer in the ensemble. Each
of the ``n`` mapping groups keeps running sums ``t1 = sum z.T X`` and
``t2 = sum z.T z`` over every chunk it has seen, and its sparse map ``mu`` is
re-solved from those sums after each chunk. Because a Gram matrix of stacked
blocks is the sum of the blocks' Gram matrices, the sums equal what a single
pass over all data so far would give.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidConfig, ShapeMismatch
from .linalg import AdmmState, admm_sparse_map

__all__ = ["FeatureSpace"]


class FeatureSpace:
    """Random projection groups refined by a sparse autoencoder, plus tanh enhancement.

    Args:
        d: input feature count.
        n: number of mapping groups.
        m: number of enhancement groups (0 disables the enhancement block).
        g: nodes per mapping group.
        h: nodes per enhancement group.
        seed: seed for every random weight; nothing random is drawn later.
        rho: ADMM penalty.
        kappa: soft-threshold level, i.e. ``lambda_sparse / rho``.
        admm_iters: ADMM iterations per refresh of ``mu``.
        shrink: scale applied to the enhancement pre-activation.
        bias: constant appended to every input row before the sparse map, so
            mapped features can carry an intercept; 0 disables the column.
        accumulate: when False, ``mu`` is fitted on the first chunk and then
            frozen (the original incremental broad learning behaviour).
    """

    def __init__(
        self,
        d: int,
        n: int,
        m: int = 0,
        g: int = 1,
        h: int = 1,
        seed: int = 0,
        *,
        rho: float = 1.0,
        kappa: float = 1e-3,
        admm_iters: int = 50,
        shrink: float = 1.0,
        bias: float = 0.1,
        accumulate: bool = True,
    ):
        if d < 1 or n < 1 or g < 1:
            raise InvalidConfig(f"d, n and g must be >= 1 (got d={d}, n={n}, g={g})")
        if m < 0 or h < 0:
            raise InvalidConfig("m and h must be >= 0")
        if m > 0 and h == 0:
            raise InvalidConfig("h must be >= 1 when m > 0")
        if rho <= 0 or kappa < 0 or admm_iters < 1:
            raise InvalidConfig("rho > 0, kappa >= 0 and admm_iters >= 1 required")
        self.d, self.n, self.m, self.g, self.h = d, n, m, g, h
        self.rng_seed = seed
        self.rho = rho
        self.kappa = kappa
        self.admm_iters = admm_iters
        self.shrink = shrink
        self.bias = bias
        self.accumulate = accumulate

        rng = np.random.default_rng(seed)
        self.w_e = rng.uniform(-1.0, 1.0, size=(n, d, g))
        self.beta_e = rng.uniform(-1.0, 1.0, size=(n, g))
        self.w_h = rng.uniform(-1.0, 1.0, size=(m, n * g, h))
        self.beta_h = rng.uniform(-1.0, 1.0, size=(m, h))

        self.d_in = d + 1 if bias else d
        self.t1 = np.zeros((n, g, self.d_in))
        self.t2 = np.zeros((n, g, g))
        self.mu = np.zeros((n, self.d_in, g))
        self.chunks_seen = 0

    @property
    def width(self) -> int:
        return self.n * self.g + self.m * self.h

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.d:
            raise ShapeMismatch(f"expected (rows, {self.d}) input, got {x.shape}")
        return x

    def _augment(self, x: np.ndarray) -> np.ndarray:
        if not self.bias:
            return x
        return np.hstack([x, np.full((x.shape[0], 1), self.bias)])

    def project(self, x: np.ndarray) -> np.ndarray:
        """Raw random projections ``z = x W_e + beta_e`` for every group, shape (n, rows, g)."""
        x = self._check(x)
        return np.einsum("sd,ndg->nsg", x, self.w_e) + self.beta_e[:, None, :]

    def update(self, x) -> np.ndarray:
        """Fold chunk ``x`` into the accumulators, refresh ``mu`` and return ``A_k``."""
        x = self._check(x)
        if self.accumulate or self.chunks_seen == 0:
            z = self.project(x)
            self.t1 += np.swapaxes(z, 1, 2) @ self._augment(x)
            self.t2 += np.swapaxes(z, 1, 2) @ z
            # keep t2 exactly symmetric against roundoff drift
            self.t2 = 0.5 * (self.t2 + np.swapaxes(self.t2, 1, 2))
            state = AdmmState.zeros(self.t1.shape, rho=self.rho, kappa=self.kappa)
            self.mu = admm_sparse_map(
                self.t2, self.t1, state, self.kappa * self.rho, self.admm_iters
            )
        self.chunks_seen += 1
        return self.transform(x)

    def transform(self, x) -> np.ndarray:
        """``[Z^n | H^m]`` for ``x`` under the current maps; no state changes."""
        x = self._augment(self._check(x))
        z = x @ self.mu  # (n, rows, g)
        zn = np.concatenate(list(z), axis=1) if self.n > 1 else z[0]
        if self.m == 0:
            return zn
        pre = zn @ self.w_h + self.beta_h[:, None, :]  # (m, rows, h)
        hm = np.tanh(self.shrink * pre)
        return np.concatenate([zn, *hm], axis=1)

    # state dump helpers used by the snapshot module
    def arrays(self) -> dict[str, np.ndarray]:
        return {
            "w_e": self.w_e,
            "beta_e": self.beta_e,
            "w_h": self.w_h,
            "beta_h": self.beta_h,
            "t1": self.t1,
            "t2": self.t2,
            "mu": self.mu,
        }
