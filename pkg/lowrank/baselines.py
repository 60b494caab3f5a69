"""
Comparison methods: the plain rank-r SVD and a column-sampling l1 baseline.
"""
import enum
import logging
import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import ArgumentError
from .matrix import FactorPair, as_matrix, balanced_factorization, entrywise_l1_norm, entrywise_linf_norm

logger = logging.getLogger(__name__)

IRLS_ITERATIONS = 50
IRLS_DELTA = 1e-8
MAX_REDRAWS = 10


class BaselineMethod(str, enum.Enum):
    SVD = 'svd'
    COLUMN_SAMPLING = 'colsample'


@dataclass(frozen=True, eq=False)
class BaselineResult:
    factors: FactorPair
    lp_error: float
    wall_time: float
    method: BaselineMethod
    trials_run: int = 1


def lp_error(M, factors, p):
    residual = M - factors.product()
    if p == 1:
        return entrywise_l1_norm(residual)
    if p == math.inf:
        return entrywise_linf_norm(residual)
    raise ArgumentError(f"p must be 1 or inf, got {p!r}")


def _check_rank(r, m, n):
    if isinstance(r, bool) or not isinstance(r, (int, np.integer)) or not 1 <= r <= min(m, n):
        raise ArgumentError(f"rank must be an integer in [1, {min(m, n)}], got {r!r}")


def svd_baseline(M, r, p=1):
    """Best rank-r Frobenius approximation of M, scored in the entrywise l_p norm."""
    started = time.perf_counter()
    M = as_matrix(M, 'M')
    _check_rank(r, *M.shape)
    factors = balanced_factorization(M, r)
    error = lp_error(M, factors, p)
    return BaselineResult(factors, error, time.perf_counter() - started, BaselineMethod.SVD)


def irls_l1_fit(U, M, iterations=IRLS_ITERATIONS, delta=IRLS_DELTA):
    """
    V (n x r) approximately minimizing |M - U V^T|_1.

    Column j of M is fit independently: v_j minimizes |M[:, j] - U v|_1,
    solved by iteratively reweighted least squares with weights
    1 / max(|residual|, delta), starting from the least-squares fit.
    """
    U = as_matrix(U, 'U')
    M = as_matrix(M, 'M')
    if U.shape[0] != M.shape[0]:
        raise ArgumentError(f"U has {U.shape[0]} rows, M has {M.shape[0]}")
    if iterations < 0 or not delta > 0:
        raise ArgumentError(f"need iterations >= 0 and delta > 0, got {iterations} and {delta}")

    V = scipy.linalg.lstsq(U, M)[0].T
    for _ in range(iterations):
        weights = 1.0 / np.maximum(np.abs(M - U @ V.T), delta)
        # per column j: (U^T W_j U) v_j = U^T W_j M[:, j]
        normal = np.einsum('ik,ij,il->jkl', U, weights, U)
        rhs = np.einsum('ik,ij,ij->jk', U, weights, M)[..., None]
        try:
            V = np.linalg.solve(normal, rhs)[..., 0]
        except np.linalg.LinAlgError:
            V = (np.linalg.pinv(normal) @ rhs)[..., 0]
    return V


def _sample_columns(M, r, rng, trial):
    n = M.shape[1]
    for attempt in range(MAX_REDRAWS + 1):
        columns = rng.choice(n, size=r, replace=False)
        U = M[:, columns]
        if np.linalg.matrix_rank(U) == r:
            return U
        if attempt < MAX_REDRAWS:
            logger.warning("trial %d: sampled columns %s are rank-deficient, redrawing", trial, columns.tolist())
    logger.warning("trial %d: no full-rank sample after %d redraws, using the pseudo-inverse fit", trial, MAX_REDRAWS)
    return U


def column_sampling_l1(M, r, trials=10, seed=0, time_budget=None):
    """
    Best of `trials` column samples: each trial takes r distinct columns of M
    as U and fits V by IRLS. Trial t draws from its own stream
    SeedSequence(seed, spawn_key=(t,)), so the result for k trials is the
    best of the first k. With `time_budget` (seconds), trials continue until
    the elapsed time reaches the budget; the budget is checked between trials.
    Ties go to the lowest trial index.
    """
    started = time.perf_counter()
    M = as_matrix(M, 'M')
    _check_rank(r, *M.shape)
    if trials < 1:
        raise ArgumentError(f"trials must be at least 1, got {trials}")

    best = None
    trial = 0
    while trial < trials or (time_budget is not None and time.perf_counter() - started < time_budget):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))
        U = _sample_columns(M, r, rng, trial)
        factors = FactorPair(U, irls_l1_fit(U, M))
        error = lp_error(M, factors, 1)
        if best is None or error < best[0]:
            best = (error, factors)
        trial += 1

    _, factors = best
    error = lp_error(M, factors, 1)
    wall_time = time.perf_counter() - started
    logger.info("column sampling: %d trials in %.3fs, best l1 error %.6e", trial, wall_time, error)
    return BaselineResult(factors, error, wall_time, BaselineMethod.COLUMN_SAMPLING, trial)
