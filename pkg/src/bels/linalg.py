"""Dense kernels shared by the feature and output layers.

Matrices are plain ``numpy.ndarray`` objects. The two solvers accept either a
single system or a stack of systems along leading axes, so the ensemble can
solve all of its output layers in one call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ShapeMismatch, SingularSystem

__all__ = [
    "AdmmState",
    "admm_lasso",
    "admm_sparse_map",
    "lasso_objective",
    "ridge_solve",
    "soft_threshold",
]


def soft_threshold(a, kappa: float):
    """Shrink ``a`` toward zero by ``kappa``; works on scalars and arrays."""
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    if np.ndim(a) == 0:
        a = float(a)
        if a > kappa:
            return a - kappa
        if a < -kappa:
            return a + kappa
        return 0.0
    a = np.asarray(a, dtype=float)
    return np.sign(a) * np.maximum(np.abs(a) - kappa, 0.0)


def _check_finite(x: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise SingularSystem(f"{what} produced non-finite values")
    return x


def ridge_solve(gram: np.ndarray, rhs: np.ndarray, lam: float = 1e-8) -> np.ndarray:
    """Solve ``(lam*I + gram) @ W = rhs``.

    ``gram`` may be ``(n, n)`` or a stack ``(..., n, n)`` with a matching
    ``rhs`` stack ``(..., n, c)``. A single system is factorized with Cholesky
    and falls back to a pivoted LU solve when roundoff makes the damped Gram
    indefinite; stacks go straight to the batched LU solver.
    """
    gram = np.asarray(gram, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if lam < 0:
        raise ValueError("lam must be non-negative")
    if gram.ndim < 2 or gram.shape[-1] != gram.shape[-2]:
        raise ShapeMismatch(f"gram must be square, got {gram.shape}")
    vector_rhs = rhs.ndim == gram.ndim - 1
    if vector_rhs:
        rhs = rhs[..., None]
    if rhs.shape[-2] != gram.shape[-1] or rhs.shape[:-2] != gram.shape[:-2]:
        raise ShapeMismatch(f"rhs {rhs.shape} does not conform to gram {gram.shape}")

    n = gram.shape[-1]
    system = gram + lam * np.eye(n)
    if gram.ndim == 2:
        try:
            factor = scipy.linalg.cho_factor(system, check_finite=False)
            out = scipy.linalg.cho_solve(factor, rhs, check_finite=False)
        except np.linalg.LinAlgError:
            try:
                out = scipy.linalg.solve(system, rhs, check_finite=False)
            except (np.linalg.LinAlgError, ValueError) as exc:
                raise SingularSystem(str(exc)) from exc
    else:
        try:
            out = np.linalg.solve(system, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularSystem(str(exc)) from exc
    _check_finite(out, "ridge_solve")
    return out[..., 0] if vector_rhs else out


@dataclass
class AdmmState:
    """Iterates of the lasso ADMM: primal ``w``, split ``o`` and scaled dual ``u``."""

    w: np.ndarray
    o: np.ndarray
    u: np.ndarray
    iterations: int = 0
    rho: float = 1.0
    kappa: float = 1e-3

    @classmethod
    def zeros(cls, shape, rho: float = 1.0, kappa: float = 1e-3) -> "AdmmState":
        if rho <= 0:
            raise ValueError("rho must be positive")
        z = np.zeros(shape)
        return cls(z, z.copy(), z.copy(), 0, rho, kappa)


def admm_lasso(
    t2: np.ndarray,
    t1: np.ndarray,
    state: AdmmState,
    lambda_sparse: float,
    iters: int,
) -> AdmmState:
    """Run ``iters`` ADMM steps for ``min ||z W - X||^2 + lambda ||W||_1``.

    The data enters only through ``t2 = z.T z`` (g x g) and ``t1 = z.T X``
    (g x d), which is what lets the caller accumulate them over chunks.
    Leading axes are treated as independent problems. Returns a new state;
    ``state`` itself is left untouched.
    """
    t2 = np.asarray(t2, dtype=float)
    t1 = np.asarray(t1, dtype=float)
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if t2.shape[-1] != t2.shape[-2] or t1.shape[-2] != t2.shape[-1]:
        raise ShapeMismatch(f"t2 {t2.shape} and t1 {t1.shape} do not conform")
    if state.w.shape != t1.shape:
        raise ShapeMismatch(f"state shape {state.w.shape} != t1 shape {t1.shape}")

    rho = state.rho
    g = t2.shape[-1]
    eye = np.eye(g)
    try:
        # one factorization serves every iteration
        inv = np.linalg.solve(t2 + rho * eye, np.broadcast_to(eye, t2.shape))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    _check_finite(inv, "admm_lasso")

    thresh = lambda_sparse / rho
    w, o, u = state.w, state.o.copy(), state.u.copy()
    for _ in range(iters):
        w = inv @ (t1 + rho * (o - u))
        o = soft_threshold(w + u, thresh)
        u = u + (w - o)
    return AdmmState(w, o, u, state.iterations + iters, rho, state.kappa)


def admm_sparse_map(
    t2: np.ndarray,
    t1: np.ndarray,
    state: AdmmState | None = None,
    lambda_sparse: float = 1e-3,
    iters: int = 50,
) -> np.ndarray:
    """Sparse feature map ``mu`` (d x g) so that ``Z = X @ mu``.

    Starts from ``state`` (zeros with rho=1 when omitted) and returns the
    transpose of the final split variable.
    """
    if state is None:
        state = AdmmState.zeros(np.shape(t1))
    final = admm_lasso(t2, t1, state, lambda_sparse, iters)
    return np.swapaxes(final.o, -1, -2).copy()


def lasso_objective(z: np.ndarray, x: np.ndarray, w_hat: np.ndarray, lam: float) -> float:
    """``||z @ w_hat - x||_F^2 + lam * ||w_hat||_1``."""
    r = z @ w_hat - x
    return float(np.sum(r * r) + lam * np.sum(np.abs(w_hat)))
