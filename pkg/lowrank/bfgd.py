"""
Bi-factored gradient descent (BFGD) on f(U V^T).

Each iteration evaluates the objective gradient G once at X = U V^T, picks the
step C / (15 L ||[U; V]||_2^2 + 3 ||G||_2) and moves both factors:

    Rule 1:  U <- U - eta G V,                    V <- V - eta G^T U
    Rule 2:  U <- U - eta (G V + gamma U B),      V <- V - eta (G^T U - gamma V B)

with B = U^T U - V^T V. Rule 2 keeps the factors balanced and is the rule for
strongly convex objectives.

With `step_search=StepSearch.ARMIJO` the rule above is the floor of an Armijo
backtracking search: larger multiples of it are tried first and accepted only
when they decrease both f and the Rule 2 merit f + gamma/4 ||B||_F^2.
"""
import enum
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .exceptions import ArgumentError, DescentViolation, NumericalFailure, StationaryStart
from .matrix import FactorPair, as_matrix, balanced_factorization, frobenius_norm, power_iteration
from .smoothers import SmootherKind

logger = logging.getLogger(__name__)


class UpdateRule(str, enum.Enum):
    RULE1 = 'rule1'
    RULE2 = 'rule2'


class InitMode(str, enum.Enum):
    GRADIENT = 'grad'
    SVD = 'svd'


class GradNorm(str, enum.Enum):
    SPECTRAL = 'spectral'
    FROBENIUS = 'frobenius'


class StepSearch(str, enum.Enum):
    FIXED = 'fixed'
    ARMIJO = 'armijo'


class Termination(str, enum.Enum):
    BUDGET_EXHAUSTED = 'budget_exhausted'
    STALLED = 'stalled'
    STATIONARY = 'stationary'


@dataclass(frozen=True)
class SolverConfig:
    """
    BFGD settings.

    `lipschitz=None` takes the objective's own constant; `rule=None` picks
    Rule 2 for strongly convex objectives (lam > 0) and Rule 1 otherwise.
    `stall_window=None` disables the stall detector. The Armijo search grows
    the step multiplier by `step_growth` after each accepted step, up to
    `max_step_scale`, and shrinks it by the same factor on each rejection.
    """
    rank: int
    iterations: int = 1000
    gamma: float = 0.25
    step_constant: float = 1.0
    lipschitz: Optional[float] = None
    rule: Optional[UpdateRule] = None
    init: InitMode = InitMode.GRADIENT
    trace_every: int = 100
    grad_norm: GradNorm = GradNorm.SPECTRAL
    power_tol: float = 1e-6
    stall_window: Optional[int] = None
    stall_tol: float = 1e-12
    check_descent: bool = True
    descent_tol: float = 1e-10
    seed: int = 0
    step_search: StepSearch = StepSearch.FIXED
    step_growth: float = 2.0
    max_step_scale: float = 1e4
    armijo_sigma: float = 1e-4

    def __post_init__(self):
        if self.rule is not None:
            object.__setattr__(self, 'rule', UpdateRule(self.rule))
        object.__setattr__(self, 'init', InitMode(self.init))
        object.__setattr__(self, 'grad_norm', GradNorm(self.grad_norm))
        object.__setattr__(self, 'step_search', StepSearch(self.step_search))
        if not self.step_growth > 1:
            raise ArgumentError(f"step_growth must exceed 1, got {self.step_growth}")
        if not self.max_step_scale >= 1:
            raise ArgumentError(f"max_step_scale must be at least 1, got {self.max_step_scale}")
        if not 0 < self.armijo_sigma < 1:
            raise ArgumentError(f"armijo_sigma must lie in (0, 1), got {self.armijo_sigma}")
        if not isinstance(self.rank, (int, np.integer)) or self.rank < 1:
            raise ArgumentError(f"rank must be a positive integer, got {self.rank!r}")
        if not isinstance(self.iterations, (int, np.integer)) or self.iterations < 0:
            raise ArgumentError(f"iterations must be a non-negative integer, got {self.iterations!r}")
        if self.gamma < 0:
            raise ArgumentError(f"gamma must be non-negative, got {self.gamma}")
        if self.step_constant <= 0:
            raise ArgumentError(f"step constant C must be positive, got {self.step_constant}")
        if self.lipschitz is not None and not self.lipschitz > 0:
            raise ArgumentError(f"Lipschitz estimate must be positive, got {self.lipschitz}")
        if self.trace_every < 1:
            raise ArgumentError(f"trace_every must be at least 1, got {self.trace_every}")
        if self.stall_window is not None and self.stall_window < 1:
            raise ArgumentError(f"stall_window must be at least 1, got {self.stall_window}")

    def check_shape(self, m, n):
        if self.rank > min(m, n):
            raise ArgumentError(f"rank {self.rank} exceeds min(m, n) = {min(m, n)}")


@dataclass
class SolveReport:
    """
    Outcome of a BFGD run. Traces hold (iteration, value) pairs sampled every
    `trace_every` iterations plus the final iterate; `final_error` is
    recomputed from the returned factors.
    """
    factors: FactorPair
    kind: SmootherKind
    termination: Termination
    iterations_run: int
    wall_time: float
    final_error: float
    objective_trace: list = field(default_factory=list)
    error_trace: list = field(default_factory=list)
    step_trace: list = field(default_factory=list)

    @property
    def final_objective(self):
        return self.objective_trace[-1][1]


class SpectralEstimator:
    """
    Spectral norms for the step-size rule, warm-started from the previous
    singular vector of the matrix playing the same role.

    A power iteration that does not converge only gives a lower bound on
    sigma_1, so the exact norm from LAPACK is used instead.
    """
    def __init__(self, tol=1e-6, seed=0):
        self.tol = tol
        self._rng = np.random.default_rng(seed)
        self._vectors = {}

    def __call__(self, key, X):
        try:
            result = power_iteration(X, tol=self.tol, start=self._vectors.get(key), rng=self._rng)
        except NumericalFailure as exc:
            exact = float(scipy.linalg.norm(X, 2))
            logger.warning(
                "spectral norm of %s did not converge (estimate %s), using exact norm %.6e",
                key, exc.estimate, exact,
            )
            self._vectors.pop(key, None)
            return exact
        self._vectors[key] = result.vector
        return result.sigma


def gradient_init(obj, r, L_hat):
    """
    X0 = -grad f(0) / L_hat, split into balanced rank-r factors.
    A zero X0 gives zero factors.
    """
    m, n = obj.shape
    if not 1 <= r <= min(m, n):
        raise ArgumentError(f"rank must be in [1, {min(m, n)}], got {r}")
    if not L_hat > 0:
        raise ArgumentError(f"Lipschitz estimate must be positive, got {L_hat}")
    X0 = -obj.grad_x(np.zeros((m, n))) / L_hat
    if not X0.any():
        return FactorPair.zeros(m, n, r)
    return balanced_factorization(X0, r)


def svd_init(M, r):
    """Balanced factors of the best rank-r Frobenius approximation of M."""
    return balanced_factorization(as_matrix(M, 'M'), r)


def step_size(factors, grad, C, L_hat, *, grad_norm=GradNorm.SPECTRAL, tol=1e-6, estimator=None):
    """
    C / (15 L_hat sigma_1([U; V])^2 + 3 ||grad||), with ||grad|| spectral by default.
    """
    estimator = estimator if estimator is not None else SpectralEstimator(tol)
    stack_sigma = estimator('factors', factors.stacked())
    if GradNorm(grad_norm) is GradNorm.FROBENIUS:
        grad_term = frobenius_norm(grad)
    else:
        grad_term = estimator('gradient', grad)
    denominator = 15.0 * L_hat * stack_sigma ** 2 + 3.0 * grad_term
    if denominator <= 0.0:
        raise StationaryStart("step size undefined: zero factors and zero gradient")
    return C / denominator


def _direction(factors, G, gamma):
    U, V = factors.U, factors.V
    grad_U = G @ V
    grad_V = G.T @ U
    if gamma:
        balance = U.T @ U - V.T @ V
        grad_U = grad_U + gamma * (U @ balance)
        grad_V = grad_V - gamma * (V @ balance)
    return grad_U, grad_V


def _descend(factors, G, eta, gamma, direction=None):
    if not eta > 0:
        raise ArgumentError(f"step size must be positive, got {eta}")
    grad_U, grad_V = direction if direction is not None else _direction(factors, G, gamma)
    U_next = factors.U - eta * grad_U
    V_next = factors.V - eta * grad_V
    if not (np.isfinite(U_next).all() and np.isfinite(V_next).all()):
        raise NumericalFailure("factor update produced non-finite entries", factors=factors)
    return FactorPair(U_next, V_next)


def balance_penalty(factors, gamma):
    """gamma/4 ||U^T U - V^T V||_F^2, the term Rule 2 descends on besides f."""
    if not gamma:
        return 0.0
    balance = factors.U.T @ factors.U - factors.V.T @ factors.V
    return 0.25 * gamma * float(np.sum(balance * balance))


def search_step(obj, factors, G, value, base_eta, gamma, scale, cfg):
    """
    One Armijo backtracking step over multiples of `base_eta`.

    Tries scale * base_eta and divides the scale by cfg.step_growth until a
    candidate lowers f and satisfies the sufficient-decrease test on the merit
    f + balance_penalty. Below scale 1 it takes the base step unchecked.
    Returns (factors, eta, scale for the next iteration).
    """
    direction = _direction(factors, G, gamma)
    slope = float(np.sum(direction[0] * direction[0]) + np.sum(direction[1] * direction[1]))
    merit = value + balance_penalty(factors, gamma)
    while scale > 1.0:
        eta = scale * base_eta
        U = factors.U - eta * direction[0]
        V = factors.V - eta * direction[1]
        if np.isfinite(U).all() and np.isfinite(V).all():
            candidate = FactorPair(U, V)
            X = candidate.product()
            if np.isfinite(X).all():
                trial = obj.value(X)
                accepted = (
                    trial <= value
                    and trial + balance_penalty(candidate, gamma) <= merit - cfg.armijo_sigma * eta * slope
                )
                if accepted:
                    return candidate, eta, min(scale * cfg.step_growth, cfg.max_step_scale)
        scale /= cfg.step_growth
    next_factors = _descend(factors, G, base_eta, gamma, direction)
    return next_factors, base_eta, min(cfg.step_growth, cfg.max_step_scale)


def rule1_update(factors, obj, eta, G=None):
    if G is None:
        G = obj.grad_x(factors.product())
    return _descend(factors, G, eta, 0.0)


def rule2_update(factors, obj, eta, gamma, G=None):
    if gamma < 0:
        raise ArgumentError(f"gamma must be non-negative, got {gamma}")
    if G is None:
        G = obj.grad_x(factors.product())
    return _descend(factors, G, eta, gamma)


def _initial_factors(obj, cfg, L_hat, init):
    m, n = obj.shape
    if init is None:
        if cfg.init is InitMode.SVD:
            return svd_init(obj.M, cfg.rank)
        return gradient_init(obj, cfg.rank, L_hat)
    if (init.m, init.n, init.rank) != (m, n, cfg.rank):
        raise ArgumentError(
            f"initial factors are {init.m}x{init.rank} and {init.n}x{init.rank}, "
            f"expected {m}x{cfg.rank} and {n}x{cfg.rank}"
        )
    return init


def run_bfgd(obj, cfg, init=None):
    """
    Run BFGD on `obj` for cfg.iterations steps and return a SolveReport.

    Raises NumericalFailure (carrying the last finite iterate) when the
    objective stops being finite, and DescentViolation when cfg.check_descent
    is set and the objective rises by more than cfg.descent_tol.
    """
    m, n = obj.shape
    cfg.check_shape(m, n)
    L_hat = cfg.lipschitz if cfg.lipschitz is not None else obj.lipschitz
    rule = cfg.rule or (UpdateRule.RULE2 if obj.strongly_convex else UpdateRule.RULE1)
    gamma = cfg.gamma if rule is UpdateRule.RULE2 else 0.0

    started = time.perf_counter()
    factors = _initial_factors(obj, cfg, L_hat, init)
    estimator = SpectralEstimator(cfg.power_tol, cfg.seed)
    logger.info(
        "BFGD start: %dx%d rank=%d kind=%s tau=%.3e lam=%.3e L=%.3e T=%d %s step=%s",
        m, n, cfg.rank, obj.kind.value, obj.tau, obj.lam, L_hat, cfg.iterations, rule.value,
        cfg.step_search.value,
    )

    objective_trace, error_trace, step_trace = [], [], []
    termination = Termination.BUDGET_EXHAUSTED
    iterations_run = 0
    previous = None
    quiet = 0
    scale = 1.0
    for iteration in range(cfg.iterations):
        X = factors.product()
        if not np.isfinite(X).all():
            raise NumericalFailure(
                f"iterate overflowed at iteration {iteration}", factors=factors, iteration=iteration,
            )
        value, G = obj.value_and_grad_x(X)
        if not (math.isfinite(value) and np.isfinite(G).all()):
            raise NumericalFailure(
                f"objective became non-finite at iteration {iteration}",
                factors=factors, iteration=iteration,
            )
        if previous is not None:
            if cfg.check_descent and value > previous + cfg.descent_tol * max(1.0, abs(previous)):
                raise DescentViolation(
                    f"objective rose from {previous!r} to {value!r} at iteration {iteration}",
                    factors=factors, iteration=iteration,
                )
            if cfg.stall_window is not None:
                change = abs(previous - value) / max(abs(previous), np.finfo(float).tiny)
                quiet = quiet + 1 if change < cfg.stall_tol else 0
                if quiet >= cfg.stall_window:
                    termination = Termination.STALLED
                    break

        try:
            eta = step_size(factors, G, cfg.step_constant, L_hat,
                            grad_norm=cfg.grad_norm, estimator=estimator)
        except StationaryStart:
            termination = Termination.STATIONARY
            break
        if cfg.step_search is StepSearch.ARMIJO:
            next_factors, eta, scale = search_step(obj, factors, G, value, eta, gamma, scale, cfg)
        else:
            next_factors = _descend(factors, G, eta, gamma)

        if iteration % cfg.trace_every == 0:
            error = obj.lp_error(X)
            objective_trace.append((iteration, value))
            error_trace.append((iteration, error))
            step_trace.append((iteration, eta))
            logger.debug("iteration %d: objective %.6e error %.6e step %.3e", iteration, value, error, eta)

        factors = next_factors
        previous = value
        iterations_run = iteration + 1

    X = factors.product()
    final_value = obj.value(X)
    final_error = obj.lp_error(X)
    objective_trace.append((iterations_run, final_value))
    error_trace.append((iterations_run, final_error))
    wall_time = time.perf_counter() - started
    logger.info(
        "BFGD %s after %d iterations in %.3fs: objective %.6e error %.6e",
        termination.value, iterations_run, wall_time, final_value, final_error,
    )
    return SolveReport(
        factors=factors,
        kind=obj.kind,
        termination=termination,
        iterations_run=iterations_run,
        wall_time=wall_time,
        final_error=final_error,
        objective_trace=objective_trace,
        error_trace=error_trace,
        step_trace=step_trace,
    )


def dist_to_target(factors, target, r):
    """
    Distance from [U; V] to the balanced factorizations of the best rank-r
    approximation of `target`, minimized over r x r orthogonal rotations
    (orthogonal Procrustes).
    """
    target = as_matrix(target, 'target')
    if target.shape != (factors.m, factors.n):
        raise ArgumentError(f"target has shape {target.shape}, factors describe {(factors.m, factors.n)}")
    if factors.rank != r:
        raise ArgumentError(f"factors have rank {factors.rank}, expected {r}")
    reference = balanced_factorization(target, r).stacked()
    stacked = factors.stacked()
    rotation, _ = scipy.linalg.orthogonal_procrustes(reference, stacked)
    return frobenius_norm(stacked - reference @ rotation)
