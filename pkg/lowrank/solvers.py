"""
Outer l1 and l-infinity solvers.

Both smooth the entrywise norm, add a ridge term and hand the result to BFGD.
Parameters come either from problem quantities (TheoryParams: OPT or an upper
bound on it, ||X*||_F^2, sigma_r and epsilon) or from the fixed experimental
constants (PracticalParams).
"""
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .bfgd import InitMode, SolverConfig, StepSearch, run_bfgd
from .exceptions import ArgumentError
from .matrix import as_matrix
from .objective import SmoothedObjective
from .smoothers import SmootherKind, check_tau

logger = logging.getLogger(__name__)

ITERATION_CONSTANT = 10.0
ITERATION_CAP = 1_000_000


def _positive(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
        raise ArgumentError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class TheoryParams:
    opt: float
    xstar_fro_sq: float
    sigma_r: float
    epsilon: float
    iteration_constant: float = ITERATION_CONSTANT
    iteration_cap: int = ITERATION_CAP

    def __post_init__(self):
        for name in ('opt', 'xstar_fro_sq', 'sigma_r', 'epsilon', 'iteration_constant'):
            object.__setattr__(self, name, _positive(name, float(getattr(self, name))))
        if self.iteration_cap < 1:
            raise ArgumentError(f"iteration_cap must be at least 1, got {self.iteration_cap}")


@dataclass(frozen=True)
class PracticalParams:
    tau: float = 1e-3
    lam: float = 1e-3
    iterations: int = 40_000

    def __post_init__(self):
        object.__setattr__(self, 'tau', check_tau(self.tau))
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ArgumentError(f"lambda must be a non-negative finite number, got {self.lam!r}")
        if self.iterations < 0:
            raise ArgumentError(f"iterations must be non-negative, got {self.iterations}")


class Schedule(NamedTuple):
    tau: float
    lam: float
    lipschitz: float
    iterations: int


def _iterations(p, first_term):
    bound = p.iteration_constant * p.sigma_r * (first_term + 1.0 / p.xstar_fro_sq)
    iterations = max(1, math.ceil(bound))
    if iterations > p.iteration_cap:
        logger.warning("iteration bound %d capped at %d", iterations, p.iteration_cap)
        iterations = p.iteration_cap
    return iterations


def derive_l1_schedule(p, m, n):
    """
    tau = eps OPT / (3mn), lam = 2 eps OPT / (3 ||X*||^2), L = 1/tau + lam,
    T = ceil(c0 sigma_r (mn / (eps OPT)^2 + 1 / ||X*||^2)).
    """
    budget = p.epsilon * p.opt
    tau = budget / (3.0 * m * n)
    lam = 2.0 * budget / (3.0 * p.xstar_fro_sq)
    return Schedule(tau, lam, 1.0 / tau + lam, _iterations(p, m * n / budget ** 2))


def derive_linf_schedule(p, m, n):
    """
    As the l1 schedule with tau = eps OPT / (3 log(2mn)) and log(mn) in place
    of mn in the iteration bound.
    """
    budget = p.epsilon * p.opt
    tau = budget / (3.0 * math.log(2 * m * n))
    lam = 2.0 * budget / (3.0 * p.xstar_fro_sq)
    # log(mn) vanishes for a 1x1 matrix
    first_term = max(math.log(m * n), 1.0) / budget ** 2
    return Schedule(tau, lam, 1.0 / tau + lam, _iterations(p, first_term))


def _schedule(mode, kind, m, n):
    if isinstance(mode, TheoryParams):
        derive = derive_l1_schedule if kind is SmootherKind.CHARBONNIER else derive_linf_schedule
        return derive(mode, m, n)
    if isinstance(mode, PracticalParams):
        return Schedule(mode.tau, mode.lam, None, mode.iterations)
    raise ArgumentError(f"mode must be TheoryParams or PracticalParams, got {type(mode).__name__}")


def _solve(kind, M, r, mode, *, init=InitMode.SVD, **options):
    M = as_matrix(M, 'M')
    m, n = M.shape
    if isinstance(r, bool) or not isinstance(r, (int, np.integer)) or not 1 <= r <= min(m, n):
        raise ArgumentError(f"rank must be an integer in [1, {min(m, n)}], got {r!r}")
    schedule = _schedule(mode, kind, m, n)
    obj = SmoothedObjective(M, kind=kind, tau=schedule.tau, lam=schedule.lam)
    options.setdefault('gamma', 0.25)
    options.setdefault('step_constant', 1.0)
    cfg = SolverConfig(
        rank=r,
        iterations=schedule.iterations,
        lipschitz=schedule.lipschitz,
        init=init,
        **options,
    )
    return run_bfgd(obj, cfg)


def solve_l1(M, r, mode, **options):
    """Rank-r approximation of M in the entrywise l1 norm (Charbonnier smoothing)."""
    return _solve(SmootherKind.CHARBONNIER, M, r, mode, **options)


def solve_linf(M, r, mode, **options):
    """
    Rank-r approximation of M in the entrywise l-infinity norm (logsumexp smoothing).

    Practical mode defaults to the Armijo step search; pass
    step_search=StepSearch.FIXED for the plain BFGD step.
    """
    if isinstance(mode, PracticalParams):
        options.setdefault('step_search', StepSearch.ARMIJO)
    return _solve(SmootherKind.LOGSUMEXP, M, r, mode, **options)


def solve(M, r, p, mode, **options):
    if p == 1:
        return solve_l1(M, r, mode, **options)
    if p == math.inf:
        return solve_linf(M, r, mode, **options)
    raise ArgumentError(f"p must be 1 or inf, got {p!r}")
