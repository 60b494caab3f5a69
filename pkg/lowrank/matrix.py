"""
Dense matrix kernels for the low-rank approximation library.

Matrices are float64 `numpy.ndarray` objects with two dimensions and finite
entries. Factor pairs and truncated SVDs are immutable values built on
read-only arrays, so they can be shared between workers without copying.
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .exceptions import ArgumentError, NumericalFailure

logger = logging.getLogger(__name__)

POWER_ITERATION_TOL = 1e-8
POWER_ITERATION_MAX_ITER = 1000


def as_matrix(X, name='X'):
    """
    Return X as a 2-D float64 array, rejecting empty or non-finite input.
    """
    A = np.asarray(X, dtype=np.float64)
    if A.ndim != 2:
        raise ArgumentError(f"{name} must be a 2-D matrix, got {A.ndim} dimension(s)")
    if A.size == 0:
        raise ArgumentError(f"{name} must have at least one row and one column")
    if not np.isfinite(A).all():
        raise ArgumentError(f"{name} contains non-finite entries")
    return A


def _read_only(A):
    A = np.array(A, dtype=np.float64, copy=True)
    A.flags.writeable = False
    return A


def _check_same_shape(X, Y, operation):
    if X.shape != Y.shape:
        raise ArgumentError(f"{operation}: shape mismatch {X.shape} vs {Y.shape}")


@dataclass(frozen=True, eq=False)
class FactorPair:
    """
    Factors (U: m x r, V: n x r) representing X = U V^T.
    """
    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        U = as_matrix(self.U, 'U')
        V = as_matrix(self.V, 'V')
        if U.shape[1] != V.shape[1]:
            raise ArgumentError(
                f"factor ranks differ: U has {U.shape[1]} columns, V has {V.shape[1]}"
            )
        object.__setattr__(self, 'U', _read_only(U))
        object.__setattr__(self, 'V', _read_only(V))

    @classmethod
    def zeros(cls, m, n, r):
        return cls(np.zeros((m, r)), np.zeros((n, r)))

    @property
    def m(self):
        return self.U.shape[0]

    @property
    def n(self):
        return self.V.shape[0]

    @property
    def rank(self):
        return self.U.shape[1]

    def product(self):
        """The m x n matrix U V^T."""
        return matmul_transposed(self.U, self.V)

    def stacked(self):
        """The (m + n) x r vertical stack [U; V]."""
        return np.vstack([self.U, self.V])

    def rotated(self, R):
        """Apply the same r x r matrix to both factors; U V^T is unchanged for orthogonal R."""
        return FactorPair(self.U @ R, self.V @ R)

    def imbalance(self):
        """Frobenius norm of U^T U - V^T V."""
        return frobenius_norm(self.U.T @ self.U - self.V.T @ self.V)


@dataclass(frozen=True, eq=False)
class TruncatedSVD:
    """
    Top-k singular triplets: left (m x k), singulars (k,), right (n x k).
    """
    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'left', _read_only(self.left))
        object.__setattr__(self, 'singulars', _read_only(self.singulars))
        object.__setattr__(self, 'right', _read_only(self.right))

    @property
    def k(self):
        return self.singulars.shape[0]

    def reconstruct(self):
        return (self.left * self.singulars) @ self.right.T


class PowerIterationResult(NamedTuple):
    sigma: float
    vector: np.ndarray
    iterations: int


def entrywise_l1_norm(X):
    """Sum of absolute values of all entries."""
    return float(np.abs(X).sum())


def entrywise_linf_norm(X):
    """Largest absolute entry."""
    return float(np.abs(X).max())


def frobenius_norm(X):
    return float(np.linalg.norm(X))


def _power_iterate(X, v, tol, max_iter):
    """
    Power iteration on X^T X from the unit vector v.
    Returns (sigma, v, iterations, converged), or None when X v vanishes.
    """
    sigma = 0.0
    for iteration in range(1, max_iter + 1):
        u = X @ v
        estimate = np.linalg.norm(u)
        if estimate == 0.0:
            return None
        w = X.T @ u
        v = w / np.linalg.norm(w)
        if abs(estimate - sigma) <= tol * estimate:
            return float(estimate), v, iteration, True
        sigma = estimate
    return float(sigma), v, max_iter, False


def power_iteration(X, *, tol=POWER_ITERATION_TOL, max_iter=POWER_ITERATION_MAX_ITER,
                    start=None, rng=None):
    """
    Largest singular value of X by power iteration on X^T X.

    Starts from `start` when given (warm start), otherwise from a random vector
    drawn from `rng`. If the start lies in the null space of X, the iteration
    restarts from the unit vector of the largest-norm column, which X cannot annihilate.
    """
    X = as_matrix(X)
    if tol <= 0:
        raise ArgumentError(f"tol must be positive, got {tol}")
    n = X.shape[1]
    column_norms = np.linalg.norm(X, axis=0)
    fallback = np.zeros(n)
    fallback[int(np.argmax(column_norms))] = 1.0
    if column_norms.max() == 0.0:
        return PowerIterationResult(0.0, fallback, 0)

    if start is None:
        rng = rng if rng is not None else np.random.default_rng(0)
        start = rng.standard_normal(n)
    start = np.asarray(start, dtype=np.float64)
    start_norm = np.linalg.norm(start)

    outcome = None
    if start_norm > 0.0 and np.isfinite(start_norm):
        outcome = _power_iterate(X, start / start_norm, tol, max_iter)
    if outcome is None:
        outcome = _power_iterate(X, fallback, tol, max_iter)

    sigma, vector, iterations, converged = outcome
    if not converged:
        raise NumericalFailure(
            f"power iteration did not reach tol={tol} within {max_iter} iterations",
            estimate=sigma,
        )
    return PowerIterationResult(sigma, vector, iterations)


def spectral_norm(X, tol=POWER_ITERATION_TOL, *, max_iter=POWER_ITERATION_MAX_ITER, rng=None):
    """Largest singular value of X within relative tolerance tol."""
    return power_iteration(X, tol=tol, max_iter=max_iter, rng=rng).sigma


def truncated_svd(X, k):
    """
    Top-k singular triplets of X.

    Signs are fixed so that the largest-magnitude entry of each left singular
    vector is positive, which keeps results reproducible across runs.
    """
    X = as_matrix(X)
    m, n = X.shape
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or not 1 <= k <= min(m, n):
        raise ArgumentError(f"rank k must be an integer in [1, {min(m, n)}], got {k!r}")
    try:
        left, singulars, right_t = scipy.linalg.svd(X, full_matrices=False, check_finite=False)
    except np.linalg.LinAlgError:
        logger.warning("gesdd did not converge on a %dx%d matrix, retrying with gesvd", m, n)
        try:
            left, singulars, right_t = scipy.linalg.svd(
                X, full_matrices=False, check_finite=False, lapack_driver='gesvd'
            )
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(f"SVD failed on a {m}x{n} matrix: {exc}") from exc

    left = left[:, :k]
    right = right_t[:k].T
    pivots = np.argmax(np.abs(left), axis=0)
    signs = np.sign(left[pivots, np.arange(k)])
    signs[signs == 0] = 1.0
    return TruncatedSVD(left * signs, singulars[:k], right * signs)


def balanced_factorization(X, r):
    """
    Equally-footed factors of the best rank-r approximation of X:
    U = A_r S_r^(1/2), V = B_r S_r^(1/2), so that U^T U = V^T V.
    """
    svd = truncated_svd(X, r)
    root = np.sqrt(svd.singulars)
    return FactorPair(svd.left * root, svd.right * root)


def hadamard(X, Y):
    _check_same_shape(X, Y, 'hadamard')
    return X * Y


def add(X, Y):
    _check_same_shape(X, Y, 'add')
    return X + Y


def scale(X, c):
    return c * X


def matmul(A, B):
    if A.shape[1] != B.shape[0]:
        raise ArgumentError(f"matmul: inner dimensions differ {A.shape} x {B.shape}")
    return A @ B


def matmul_transposed(A, B):
    """A B^T."""
    if A.shape[1] != B.shape[1]:
        raise ArgumentError(f"matmul_transposed: column counts differ {A.shape} vs {B.shape}")
    return A @ B.T


def stack(factors):
    """The (m + n) x r vertical stack [U; V] of a factor pair."""
    return factors.stacked()
