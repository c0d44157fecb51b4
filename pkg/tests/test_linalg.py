import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bels.errors import ShapeMismatch, SingularSystem
from bels.linalg import AdmmState, admm_lasso, admm_sparse_map, lasso_objective, ridge_solve, soft_threshold

from oracles import gauss_solve, soft


@pytest.mark.parametrize(
    "a, kappa, expected",
    [(0.5, 0.001, 0.499), (0.0005, 0.001, 0.0), (-0.5, 0.001, -0.499), (0.001, 0.001, 0.0)],
)
def test_soft_threshold_branches(a, kappa, expected):
    assert soft_threshold(a, kappa) == pytest.approx(expected, abs=1e-15)


@given(st.floats(-1e6, 1e6), st.floats(0, 10))
def test_soft_threshold_is_odd_and_matches_scalar_oracle(a, k):
    assert soft_threshold(-a, k) == -soft_threshold(a, k)
    assert soft_threshold(a, k) == soft(a, k)
    arr = soft_threshold(np.array([a, -a]), k)
    assert arr[0] == soft(a, k) and arr[1] == soft(-a, k)


def test_ridge_identity_and_diagonal():
    np.testing.assert_array_equal(ridge_solve(np.eye(2), np.eye(2), 0.0), np.eye(2))
    out = ridge_solve(np.diag([2.0, 2.0]), np.array([[4.0], [6.0]]), 0.0)
    np.testing.assert_allclose(out, [[2.0], [3.0]], rtol=0, atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_ridge_matches_elimination_oracle(seed):
    rng = np.random.default_rng(seed)
    b = rng.standard_normal((5, 5))
    spd = b @ b.T + 0.5 * np.eye(5)
    rhs = rng.standard_normal((5, 3))
    expected = np.array(gauss_solve((spd + 1e-8 * np.eye(5)).tolist(), rhs.tolist()))
    np.testing.assert_allclose(ridge_solve(spd, rhs, 1e-8), expected, rtol=0, atol=1e-8)


def test_ridge_residual_bound_and_vector_rhs():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((40, 8))
    g = a.T @ a
    rhs = rng.standard_normal(8)
    w = ridge_solve(g, rhs, 1e-3)
    assert w.shape == (8,)
    resid = np.abs((g + 1e-3 * np.eye(8)) @ w - rhs).max()
    assert resid <= 1e-8 * max(1.0, np.abs(rhs).max())


def test_ridge_batched_equals_loop():
    rng = np.random.default_rng(4)
    grams, rhss = [], []
    for _ in range(4):
        a = rng.standard_normal((12, 6))
        grams.append(a.T @ a)
        rhss.append(rng.standard_normal((6, 2)))
    stacked = ridge_solve(np.stack(grams), np.stack(rhss), 1e-6)
    for g, r, w in zip(grams, rhss, stacked):
        np.testing.assert_allclose(w, ridge_solve(g, r, 1e-6), rtol=1e-10, atol=1e-12)


def test_ridge_indefinite_falls_back_to_lu():
    gram = np.array([[1.0, 2.0], [2.0, 1.0]])  # indefinite but invertible
    rhs = np.array([[3.0], [3.0]])
    np.testing.assert_allclose(ridge_solve(gram, rhs, 0.0), [[1.0], [1.0]])


def test_ridge_errors():
    with pytest.raises(SingularSystem):
        ridge_solve(np.zeros((3, 3)), np.ones((3, 1)), 0.0)
    with pytest.raises(ShapeMismatch):
        ridge_solve(np.eye(3), np.ones((2, 1)))
    with pytest.raises(ShapeMismatch):
        ridge_solve(np.ones((2, 3)), np.ones((2, 1)))


def test_admm_single_step_by_hand():
    # (I + I)^-1 (I + 0) = 0.5 I; soft threshold 0.001 -> 0.499 I
    state = AdmmState.zeros((3, 3), rho=1.0)
    out = admm_lasso(np.eye(3), np.eye(3), state, 0.001, 1)
    np.testing.assert_allclose(out.w, 0.5 * np.eye(3), atol=1e-15)
    np.testing.assert_allclose(out.o, 0.499 * np.eye(3), atol=1e-15)
    np.testing.assert_allclose(out.u, 0.001 * np.eye(3), atol=1e-15)
    mu = admm_sparse_map(np.eye(3), np.eye(3), AdmmState.zeros((3, 3)), 0.001, 1)
    np.testing.assert_allclose(mu, 0.499 * np.eye(3), atol=1e-15)
    # the input state is not mutated
    assert not state.o.any() and state.iterations == 0


def test_admm_single_step_scripted_oracle_rectangular():
    rng = np.random.default_rng(0)
    z = rng.standard_normal((20, 4))
    x = rng.standard_normal((20, 3))
    t2, t1 = z.T @ z, z.T @ x
    rho, lam = 1.0, 0.001
    # scripted single step with the elimination oracle
    w = np.array(gauss_solve((t2 + rho * np.eye(4)).tolist(), t1.tolist()))
    o = np.vectorize(lambda a: soft(a, lam / rho))(w)
    mu = admm_sparse_map(t2, t1, AdmmState.zeros(t1.shape), lam, 1)
    assert mu.shape == (3, 4)
    np.testing.assert_allclose(mu, o.T, atol=1e-10)


def test_admm_zero_t1_is_fixed_point():
    rng = np.random.default_rng(1)
    b = rng.standard_normal((4, 4))
    mu = admm_sparse_map(b @ b.T, np.zeros((4, 2)), None, 0.001, 25)
    assert not mu.any()


def test_admm_without_penalty_keeps_o_equal_w():
    rng = np.random.default_rng(2)
    z = rng.standard_normal((30, 3))
    x = rng.standard_normal((30, 2))
    state = AdmmState.zeros((3, 2))
    for _ in range(5):
        state = admm_lasso(z.T @ z, z.T @ x, state, 0.0, 1)
        np.testing.assert_array_equal(state.o, state.w)
        assert not state.u.any()


@pytest.mark.parametrize("seed", range(20))
def test_admm_objective_decreases(seed):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((20, 5))
    x = rng.standard_normal((20, 3))
    lam = 0.1
    first = admm_sparse_map(z.T @ z, z.T @ x, None, lam, 1)
    fifty = admm_sparse_map(z.T @ z, z.T @ x, None, lam, 50)
    assert lasso_objective(z, x, fifty.T, lam) <= lasso_objective(z, x, first.T, lam)


def test_admm_batched_matches_individual():
    rng = np.random.default_rng(5)
    zs = rng.standard_normal((3, 15, 2))
    x = rng.standard_normal((15, 4))
    t2 = np.swapaxes(zs, 1, 2) @ zs
    t1 = np.swapaxes(zs, 1, 2) @ x
    batched = admm_sparse_map(t2, t1, AdmmState.zeros(t1.shape), 0.01, 10)
    for i in range(3):
        np.testing.assert_allclose(batched[i], admm_sparse_map(t2[i], t1[i], None, 0.01, 10), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 6), st.integers(1, 6))
def test_outputs_finite(seed, g, d):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((10, g)) * 100
    x = rng.standard_normal((10, d)) * 100
    mu = admm_sparse_map(z.T @ z, z.T @ x, None, 0.001, 20)
    assert np.all(np.isfinite(mu))
