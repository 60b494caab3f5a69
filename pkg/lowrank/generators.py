"""
Seeded synthetic instances for the experiments.

Every generator draws from its own numpy Generator (PCG64) seeded with a
64-bit integer; `derive_seed` splits one experiment seed into independent
per-(rank, trial) seeds.
"""
import hashlib
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .exceptions import ArgumentError


class QuantizedInstance(NamedTuple):
    matrix: np.ndarray
    certificate: float
    low_rank: np.ndarray


class PlantedInstance(NamedTuple):
    """
    Rank-r Gaussian signal plus sparse +/- corruption. `opt_bound` is the
    corruption's l1 mass, an upper bound on the best rank-r l1 error.
    """
    matrix: np.ndarray
    low_rank: np.ndarray
    opt_bound: float
    xstar_fro_sq: float
    sigma_r: float


def derive_seed(seed, *keys):
    """64-bit sub-seed from BLAKE2b over the seed and the keys."""
    digest = hashlib.blake2b(digest_size=8)
    digest.update(repr((int(seed),) + tuple(keys)).encode())
    return int.from_bytes(digest.digest(), 'big')


def _check_dims(m, n, r=None):
    for name, value in (('m', m), ('n', n)):
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
            raise ArgumentError(f"{name} must be a positive integer, got {value!r}")
    if r is not None and (isinstance(r, bool) or not isinstance(r, (int, np.integer)) or not 1 <= r <= min(m, n)):
        raise ArgumentError(f"rank must be an integer in [1, {min(m, n)}], got {r!r}")


def _gaussian_product(rng, m, n, r):
    return rng.standard_normal((m, r)) @ rng.standard_normal((n, r)).T


def gen_uniform(m, n, seed):
    _check_dims(m, n)
    return np.random.default_rng(seed).random((m, n))


def gen_sign(m, n, seed):
    _check_dims(m, n)
    return np.where(np.random.default_rng(seed).random((m, n)) < 0.5, -1.0, 1.0)


def gen_quantized(m, n, r_true, seed):
    """
    M = round(U V^T) with U, V standard Gaussian of rank r_true.
    The certificate |M - U V^T|_inf is at most 0.5.
    """
    _check_dims(m, n, r_true)
    low_rank = _gaussian_product(np.random.default_rng(seed), m, n, r_true)
    matrix = np.rint(low_rank)
    return QuantizedInstance(matrix, float(np.abs(matrix - low_rank).max()), low_rank)


def gen_planted_sparse(m, n, r, seed, fraction=0.05, magnitude=0.1):
    _check_dims(m, n, r)
    if not 0 <= fraction <= 1 or magnitude < 0:
        raise ArgumentError(f"need 0 <= fraction <= 1 and magnitude >= 0, got {fraction} and {magnitude}")
    rng = np.random.default_rng(seed)
    low_rank = _gaussian_product(rng, m, n, r)
    count = int(round(fraction * m * n))
    corruption = np.zeros(m * n)
    cells = rng.choice(m * n, size=count, replace=False)
    corruption[cells] = magnitude * rng.choice([-1.0, 1.0], size=count)
    corruption = corruption.reshape(m, n)
    singulars = scipy.linalg.svdvals(low_rank)
    return PlantedInstance(
        matrix=low_rank + corruption,
        low_rank=low_rank,
        opt_bound=float(np.abs(corruption).sum()),
        xstar_fro_sq=float(np.sum(low_rank * low_rank)),
        sigma_r=float(singulars[r - 1]),
    )
