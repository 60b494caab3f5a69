"""
Smooth surrogates for entrywise matrix norms.

Charbonnier and Huber stand in for the entrywise l1 norm, logsumexp for the
entrywise l-infinity norm. FROBENIUS (half the squared Frobenius norm) is the
plain quadratic used as a reference objective.
"""
import enum
import math

import numpy as np

from .exceptions import ArgumentError
from .matrix import entrywise_l1_norm, entrywise_linf_norm, frobenius_norm


class SmootherKind(str, enum.Enum):
    CHARBONNIER = 'charbonnier'
    HUBER = 'huber'
    LOGSUMEXP = 'logsumexp'
    FROBENIUS = 'frobenius'

    @property
    def target_norm(self):
        """The entrywise norm this smoother approximates: 1, inf or 2 (Frobenius)."""
        if self is SmootherKind.LOGSUMEXP:
            return math.inf
        if self is SmootherKind.FROBENIUS:
            return 2
        return 1


def check_tau(tau):
    numeric = isinstance(tau, (int, float, np.integer, np.floating)) and not isinstance(tau, bool)
    if not (numeric and math.isfinite(tau) and tau > 0):
        raise ArgumentError(f"smoothing parameter tau must be a positive finite number, got {tau!r}")
    return float(tau)


# Charbonnier (pseudo-Huber)

def charbonnier_value(X, tau):
    """
    tau * sum(sqrt((X/tau)^2 + 1) - 1), evaluated as sum(X^2 / (hypot(X, tau) + tau))
    to avoid cancellation for entries much smaller than tau.
    """
    tau = check_tau(tau)
    return float(np.sum(X * X / (np.hypot(X, tau) + tau)))


def charbonnier_grad(X, tau):
    """Entrywise (X/tau) / sqrt((X/tau)^2 + 1)."""
    tau = check_tau(tau)
    return X / np.hypot(X, tau)


def charbonnier_hessian_diag(X, tau):
    """
    Diagonal of the (diagonal) Hessian, as an m x n matrix:
    (1/tau) * ((X/tau)^2 + 1)^(-3/2).
    """
    tau = check_tau(tau)
    return tau * tau / np.hypot(X, tau) ** 3


# Huber

def huber_value(X, tau):
    tau = check_tau(tau)
    magnitude = np.abs(X)
    return float(np.sum(np.where(magnitude <= tau, X * X / (2 * tau), magnitude - tau / 2)))


def huber_grad(X, tau):
    tau = check_tau(tau)
    return np.clip(X / tau, -1.0, 1.0)


# logsumexp

def _shifted_exponentials(X, tau):
    """
    Return (peak, total, P, N) where P and N are e^(X/tau) +/- e^(-X/tau) scaled
    by e^(-peak/tau) and total is the sum of the scaled P. Every scaled
    exponential is at most 1.
    """
    peak = float(np.abs(X).max())
    shift = peak / tau
    up = np.exp(X / tau - shift)
    down = np.exp(-X / tau - shift)
    P = up + down
    return peak, float(P.sum()), P, up - down


def logsumexp_value(X, tau):
    """tau * log(sum(e^(X/tau) + e^(-X/tau)) / (2mn))."""
    tau = check_tau(tau)
    peak, total, _, _ = _shifted_exponentials(X, tau)
    return peak + tau * (math.log(total) - math.log(2 * X.size))


def logsumexp_grad(X, tau):
    """N / sum(P); every entry is below 1 in magnitude and the magnitudes sum to at most 1."""
    tau = check_tau(tau)
    _, total, _, N = _shifted_exponentials(X, tau)
    return N / total


def logsumexp_value_and_grad(X, tau):
    tau = check_tau(tau)
    peak, total, _, N = _shifted_exponentials(X, tau)
    value = peak + tau * (math.log(total) - math.log(2 * X.size))
    return value, N / total


def logsumexp_hessian_quadform(X, tau, Y):
    """
    y^T H y for the mn x mn logsumexp Hessian H at X, without forming H:
    (sum(P Y^2) - sum(N Y)^2 / sum(P)) / (tau sum(P)).
    """
    tau = check_tau(tau)
    if X.shape != Y.shape:
        raise ArgumentError(f"logsumexp_hessian_quadform: shape mismatch {X.shape} vs {Y.shape}")
    _, total, P, N = _shifted_exponentials(X, tau)
    weights = P / total
    skew = float(np.sum(N / total * Y))
    quad = (float(np.sum(weights * Y * Y)) - skew * skew) / tau
    # rounding can leave a tiny negative
    return max(quad, 0.0)


# Frobenius reference

def frobenius_value(X, tau=None):
    return 0.5 * float(np.sum(X * X))


def frobenius_grad(X, tau=None):
    return np.array(X, dtype=np.float64, copy=True)


_VALUE = {
    SmootherKind.CHARBONNIER: charbonnier_value,
    SmootherKind.HUBER: huber_value,
    SmootherKind.LOGSUMEXP: logsumexp_value,
    SmootherKind.FROBENIUS: frobenius_value,
}

_GRAD = {
    SmootherKind.CHARBONNIER: charbonnier_grad,
    SmootherKind.HUBER: huber_grad,
    SmootherKind.LOGSUMEXP: logsumexp_grad,
    SmootherKind.FROBENIUS: frobenius_grad,
}


def smoother_value(kind, X, tau):
    return _VALUE[SmootherKind(kind)](X, tau)


def smoother_grad(kind, X, tau):
    return _GRAD[SmootherKind(kind)](X, tau)


def smoother_value_and_grad(kind, X, tau):
    kind = SmootherKind(kind)
    if kind is SmootherKind.LOGSUMEXP:
        return logsumexp_value_and_grad(X, tau)
    return _VALUE[kind](X, tau), _GRAD[kind](X, tau)


def lipschitz_constant(kind, tau):
    """
    Gradient Lipschitz constant: 1/tau for Charbonnier, Huber and logsumexp,
    1 for the Frobenius reference.
    """
    kind = SmootherKind(kind)
    if kind is SmootherKind.FROBENIUS:
        return 1.0
    return 1.0 / check_tau(tau)


def smoothing_slack(kind, tau, m, n):
    """
    Additive gap between the true norm and its smoother:
    norm(X) - slack <= smoother(X) <= norm(X).
    """
    kind = SmootherKind(kind)
    if kind is SmootherKind.FROBENIUS:
        return 0.0
    tau = check_tau(tau)
    if kind is SmootherKind.CHARBONNIER:
        return m * n * tau
    if kind is SmootherKind.HUBER:
        return m * n * tau / 2
    return tau * math.log(2 * m * n)


def entrywise_error(kind, R):
    """The norm the smoother of `kind` approximates, evaluated at the residual R."""
    norm = SmootherKind(kind).target_norm
    if norm == 1:
        return entrywise_l1_norm(R)
    if norm == math.inf:
        return entrywise_linf_norm(R)
    return frobenius_norm(R)
