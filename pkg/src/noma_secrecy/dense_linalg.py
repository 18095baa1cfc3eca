"""Dense LU with partial pivoting for the Newton KKT systems.

Row pivoting is required here: the KKT matrix has a zero lower-right
block, so unpivoted elimination breaks down structurally.  Matrices are
plain float64 row-major numpy arrays.

The elimination and substitution kernels are plain triple loops; when
numba is available they are JIT-compiled (the barrier solver factors a
fresh KKT matrix every Newton step, so this is the hot spot), otherwise
a vectorized numpy fallback runs the same algorithm.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrixError

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


@dataclass
class LUFactors:
    """Combined L\\U storage (unit lower diagonal implied) plus the row order.

    ``perm`` holds the pivoted row order: row i of U corresponds to row
    perm[i] of the input matrix.
    """

    lu: np.ndarray
    perm: np.ndarray

    @property
    def n(self) -> int:
        return self.lu.shape[0]


@njit(cache=True)
def _factor_kernel(a, perm):
    """In-place elimination; returns the column of a zero pivot, else -1."""
    n = a.shape[0]
    for k in range(n):
        piv = k
        best = abs(a[k, k])
        for i in range(k + 1, n):
            v = abs(a[i, k])
            if v > best:
                best = v
                piv = i
        if best == 0.0:
            return k
        if piv != k:
            for j in range(n):
                tmp = a[k, j]
                a[k, j] = a[piv, j]
                a[piv, j] = tmp
            tmp_p = perm[k]
            perm[k] = perm[piv]
            perm[piv] = tmp_p
        akk = a[k, k]
        for i in range(k + 1, n):
            lik = a[i, k] / akk
            a[i, k] = lik
            for j in range(k + 1, n):
                a[i, j] -= lik * a[k, j]
    return -1


def _factor_fallback(a, perm):
    n = a.shape[0]
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if a[piv, k] == 0.0:
            return k
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            perm[[k, piv]] = perm[[piv, k]]
        a[k + 1:, k] /= a[k, k]
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])
    return -1


@njit(cache=True)
def _substitute_kernel(lu, x):
    """Forward substitution on unit-L, then back substitution on U, in place."""
    n = lu.shape[0]
    for i in range(1, n):
        s = 0.0
        for j in range(i):
            s += lu[i, j] * x[j]
        x[i] -= s
    for i in range(n - 1, -1, -1):
        s = 0.0
        for j in range(i + 1, n):
            s += lu[i, j] * x[j]
        x[i] = (x[i] - s) / lu[i, i]


def _substitute_fallback(lu, x):
    n = lu.shape[0]
    for i in range(1, n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        if i + 1 < n:
            x[i] -= lu[i, i + 1:] @ x[i + 1:]
        x[i] /= lu[i, i]


def lu_factor(a) -> LUFactors:
    """Factor a square matrix as P A = L U with partial (row) pivoting."""
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"need a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    perm = np.arange(a.shape[0])
    bad = _factor_kernel(a, perm) if _HAVE_NUMBA else _factor_fallback(a, perm)
    if bad >= 0:
        raise SingularMatrixError(f"zero pivot in column {bad}")
    return LUFactors(lu=a, perm=perm)


def lu_solve(factors: LUFactors, rhs) -> np.ndarray:
    """Solve A x = rhs by forward substitution on L then back-substitution on U."""
    rhs = np.asarray(rhs, dtype=float)
    n = factors.n
    if rhs.shape != (n,):
        raise ValueError(f"rhs shape {rhs.shape} does not match system size {n}")
    x = np.ascontiguousarray(rhs[factors.perm])
    if _HAVE_NUMBA:
        _substitute_kernel(factors.lu, x)
    else:
        _substitute_fallback(factors.lu, x)
    return x


def frobenius_norm(a) -> float:
    a = np.asarray(a, dtype=float)
    return float(np.sqrt(np.sum(a * a)))
