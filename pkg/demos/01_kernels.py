"""Linear algebra building blocks: ridge solves and the lasso sparse map.

The ridge solve is compared with a plain dense solve, and the lasso
objective is printed as ADMM iterations grow.
"""

import numpy as np

from bels.linalg import admm_sparse_map, lasso_objective, ridge_solve

rng = np.random.default_rng(0)

# ridge: (A + lambda I) W = D for a symmetric positive definite A
b = rng.standard_normal((6, 6))
a = b @ b.T
d = rng.standard_normal((6, 2))
w = ridge_solve(a, d, 1e-8)
print("ridge residual vs dense solve:", np.abs(w - np.linalg.solve(a + 1e-8 * np.eye(6), d)).max())

# lasso via ADMM: a sparse map from random features z back to the inputs x
z = rng.standard_normal((200, 8))
x = z[:, :3] @ rng.standard_normal((3, 3)) + 0.01 * rng.standard_normal((200, 3))
for iters in (1, 5, 20, 50):
    mu = admm_sparse_map(z.T @ z, z.T @ x, None, 1e-2, iters)
    obj = lasso_objective(z, x, mu.T, 1e-2)
    print(f"{iters:3d} iterations: objective {obj:10.4f}, zeros {np.mean(np.abs(mu) < 1e-9):.0%}")
