"""
Brute-force oracles shared by the test modules.
"""
import itertools
import math

import numpy as np
from django.conf import settings

from lowrank.matrix import balanced_factorization

slow_tests_enabled = settings.LOWRANK['RUN_SLOW_TESTS']
SLOW_REASON = 'set LOWRANK_RUN_SLOW_TESTS=True to run the reproduction tests'


def numeric_gradient(f, X, h=1e-6):
    """Central differences of a scalar function of a matrix, one entry at a time."""
    grad = np.zeros_like(X)
    for index in np.ndindex(X.shape):
        step = np.zeros_like(X)
        step[index] = h
        grad[index] = (f(X + step) - f(X - step)) / (2 * h)
    return grad


def scaled_numeric_gradient(f, X, h=1e-6):
    """Central differences with step h * max(1, |X_ij|) for entry (i, j)."""
    grad = np.zeros_like(X)
    for index in np.ndindex(X.shape):
        step = np.zeros_like(X)
        step[index] = h * max(1.0, abs(X[index]))
        grad[index] = (f(X + step) - f(X - step)) / (2 * step[index])
    return grad


def relative_error(actual, expected):
    scale = max(np.linalg.norm(expected), np.finfo(float).tiny)
    return float(np.linalg.norm(actual - expected) / scale)


def rotation(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def grid_distance_to_target(factors, target, r, steps=3600):
    """
    min over R of |[U; V] - W R|_F, with W the balanced factors of the best
    rank-r approximation of target. r = 1 checks both signs, r = 2 sweeps
    rotations and reflections on an angle grid.
    """
    reference = balanced_factorization(target, r).stacked()
    stacked = factors.stacked()
    if r == 1:
        return min(np.linalg.norm(stacked - sign * reference) for sign in (1.0, -1.0))
    if r != 2:
        raise ValueError("the grid oracle handles r = 1 and r = 2")
    reflect = np.diag([1.0, -1.0])
    best = math.inf
    for angle in np.linspace(0.0, 2 * math.pi, steps, endpoint=False):
        for R in (rotation(angle), rotation(angle) @ reflect):
            best = min(best, np.linalg.norm(stacked - reference @ R))
    return best


def grid_l1_regression(U, y, center, radius, steps=201, rounds=3):
    """
    min over v of |y - U v|_1 for two-column U, by a grid search that is
    refined around the best point `rounds` times.
    """
    best_point = np.asarray(center, dtype=np.float64)
    best = math.inf
    for _ in range(rounds):
        axis = np.linspace(-radius, radius, steps)
        points = best_point + np.array(list(itertools.product(axis, axis)))
        values = np.abs(y[None, :] - points @ U.T).sum(axis=1)
        index = int(np.argmin(values))
        if values[index] < best:
            best, best_point = float(values[index]), points[index]
        radius = 4 * radius / (steps - 1)
    return best
