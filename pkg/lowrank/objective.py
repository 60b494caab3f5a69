"""
The composite smoothed objective f(X) = smoother(M - X, tau) + (lam/2) ||X||_F^2.
"""
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ArgumentError
from .matrix import FactorPair, as_matrix, matmul
from .smoothers import (
    SmootherKind,
    check_tau,
    entrywise_error,
    lipschitz_constant,
    smoother_value_and_grad,
    smoothing_slack,
)


@dataclass(frozen=True, eq=False)
class SmoothedObjective:
    """
    Smoothed l_p low-rank objective over the data matrix M.

    With lam > 0 the objective is lam-strongly convex in X and its gradient is
    Lipschitz with constant lipschitz_constant(kind, tau) + lam.
    """
    M: np.ndarray
    kind: SmootherKind = SmootherKind.CHARBONNIER
    tau: float = 1e-3
    lam: float = 0.0

    def __post_init__(self):
        M = np.array(as_matrix(self.M, 'M'), copy=True)
        M.flags.writeable = False
        object.__setattr__(self, 'M', M)
        object.__setattr__(self, 'kind', SmootherKind(self.kind))
        object.__setattr__(self, 'tau', check_tau(self.tau))
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ArgumentError(f"ridge weight lam must be a non-negative finite number, got {self.lam!r}")
        object.__setattr__(self, 'lam', float(self.lam))

    @property
    def shape(self):
        return self.M.shape

    @property
    def lipschitz(self):
        return lipschitz_constant(self.kind, self.tau) + self.lam

    @property
    def strongly_convex(self):
        return self.lam > 0

    @property
    def slack(self):
        """Additive smoothing gap of the data term."""
        m, n = self.shape
        return smoothing_slack(self.kind, self.tau, m, n)

    def _check(self, X):
        X = as_matrix(X)
        if X.shape != self.shape:
            raise ArgumentError(f"X has shape {X.shape}, objective expects {self.shape}")
        return X

    def value(self, X):
        return self.value_and_grad_x(X)[0]

    def grad_x(self, X):
        return self.value_and_grad_x(X)[1]

    def value_and_grad_x(self, X):
        """
        Value and gradient in one pass. The gradient is
        -smoother_grad(M - X) + lam * X.
        """
        X = self._check(X)
        smooth, smooth_grad = smoother_value_and_grad(self.kind, self.M - X, self.tau)
        ridge = 0.5 * self.lam * float(np.sum(X * X))
        return smooth + ridge, self.lam * X - smooth_grad

    def grad_factors(self, factors):
        """
        Gradients with respect to U and V: (G V, G^T U), with G = grad_x(U V^T)
        evaluated once.
        """
        if factors.m != self.shape[0] or factors.n != self.shape[1]:
            raise ArgumentError(
                f"factors describe a {factors.m}x{factors.n} matrix, objective expects {self.shape}"
            )
        G = self.grad_x(factors.product())
        return matmul(G, factors.V), matmul(G.T, factors.U)

    def lp_error(self, X):
        """True error |M - X|_p in the norm the smoother approximates."""
        X = self._check(X)
        return entrywise_error(self.kind, self.M - X)

    def factor_error(self, factors: FactorPair):
        return self.lp_error(factors.product())
