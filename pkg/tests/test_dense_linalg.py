import numpy as np
import pytest

from noma_secrecy.dense_linalg import LUFactors, frobenius_norm, lu_factor, lu_solve
from noma_secrecy.errors import SingularMatrixError


def reconstruct(factors: LUFactors) -> np.ndarray:
    """P A from L and U, for the reconstruction invariant."""
    n = factors.n
    lower = np.tril(factors.lu, -1) + np.eye(n)
    upper = np.triu(factors.lu)
    return lower @ upper


def test_identity_factorization():
    factors = lu_factor(np.eye(3))
    assert np.array_equal(factors.lu, np.eye(3))
    assert np.array_equal(factors.perm, np.arange(3))


def test_two_by_two_reconstruction():
    a = np.array([[2.0, 1.0], [1.0, 3.0]])
    factors = lu_factor(a)
    assert np.max(np.abs(reconstruct(factors) - a[factors.perm])) <= 1e-14


def test_two_by_two_solve():
    a = np.array([[2.0, 1.0], [1.0, 3.0]])
    x = lu_solve(lu_factor(a), np.array([3.0, 4.0]))
    assert x == pytest.approx([1.0, 1.0], rel=1e-14)


def test_exactly_singular_raises():
    with pytest.raises(SingularMatrixError):
        lu_factor(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_reconstruction_invariant_random(rng):
    for n in (5, 20, 60):
        a = rng.standard_normal((n, n))
        factors = lu_factor(a)
        err = frobenius_norm(reconstruct(factors) - a[factors.perm])
        assert err <= 1e-10 * frobenius_norm(a)
        # the permutation really is a permutation of 0..n-1
        assert sorted(factors.perm.tolist()) == list(range(n))


def test_known_solution_recovery(rng):
    a = rng.standard_normal((50, 50)) + 3 * np.eye(50)
    x_true = rng.standard_normal(50)
    x = lu_solve(lu_factor(a), a @ x_true)
    assert np.linalg.norm(x - x_true) <= 1e-8 * np.linalg.norm(x_true)


def test_solve_residual_bound(rng):
    for _ in range(20):
        n = int(rng.integers(2, 40))
        a = rng.standard_normal((n, n))
        rhs = rng.standard_normal(n)
        x = lu_solve(lu_factor(a), rhs)
        resid = np.linalg.norm(a @ x - rhs)
        bound = 1e-8 * (frobenius_norm(a) * np.linalg.norm(x) + np.linalg.norm(rhs))
        assert resid <= bound


def test_pivoting_handles_zero_leading_entry():
    # unpivoted elimination would divide by zero here
    a = np.array([[0.0, 2.0], [1.0, 1.0]])
    x = lu_solve(lu_factor(a), np.array([2.0, 2.0]))
    assert x == pytest.approx([1.0, 1.0], rel=1e-14)


def test_input_validation():
    with pytest.raises(ValueError):
        lu_factor(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        lu_factor(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    factors = lu_factor(np.eye(3))
    with pytest.raises(ValueError):
        lu_solve(factors, np.zeros(4))


def test_factor_does_not_mutate_input():
    a = np.array([[2.0, 1.0], [1.0, 3.0]])
    backup = a.copy()
    lu_factor(a)
    assert np.array_equal(a, backup)


def test_frobenius_norm_matches_numpy(rng):
    a = rng.standard_normal((7, 4))
    assert frobenius_norm(a) == pytest.approx(np.linalg.norm(a), rel=1e-12)
