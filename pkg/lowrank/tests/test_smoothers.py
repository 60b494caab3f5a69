import math

import numpy as np
from django.test import SimpleTestCase

from lowrank.exceptions import ArgumentError
from lowrank.matrix import entrywise_l1_norm, entrywise_linf_norm
from lowrank.smoothers import (
    SmootherKind,
    charbonnier_grad,
    charbonnier_hessian_diag,
    charbonnier_value,
    check_tau,
    huber_grad,
    huber_value,
    lipschitz_constant,
    logsumexp_grad,
    logsumexp_hessian_quadform,
    logsumexp_value,
    logsumexp_value_and_grad,
    smoother_grad,
    smoother_value,
    smoothing_slack,
)

from .helpers import numeric_gradient, relative_error, scaled_numeric_gradient

# absolute slack for float rounding in the sandwich bounds
ROUNDING = 1e-12


def random_matrices(seed, count, max_dim=30):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        m, n = rng.integers(1, max_dim + 1, size=2)
        yield rng.standard_normal((m, n)) * rng.choice([0.01, 1.0, 10.0])


class CheckTauTests(SimpleTestCase):
    def test_rejects_non_positive_and_non_finite(self):
        for tau in (0, -1.0, math.inf, math.nan, None, True):
            with self.subTest(tau=tau):
                with self.assertRaises(ArgumentError):
                    check_tau(tau)

    def test_every_smoother_checks_tau(self):
        X = np.ones((2, 2))
        for function in (charbonnier_value, charbonnier_grad, huber_value, logsumexp_value, logsumexp_grad):
            with self.assertRaises(ArgumentError):
                function(X, 0.0)


class CharbonnierTests(SimpleTestCase):
    def test_sandwich_bounds(self):
        for index, X in enumerate(random_matrices(10, 1000)):
            tau = (1.0, 0.1, 1e-3)[index % 3]
            value = charbonnier_value(X, tau)
            l1 = entrywise_l1_norm(X)
            self.assertLessEqual(value, l1 + ROUNDING * max(1.0, l1))
            self.assertGreaterEqual(value, l1 - X.size * tau - ROUNDING * max(1.0, l1))

    def test_value_at_zero_and_small_entries(self):
        self.assertEqual(charbonnier_value(np.zeros((3, 3)), 1e-3), 0.0)
        # x^2 / (2 tau) for |x| << tau
        self.assertAlmostEqual(charbonnier_value(np.array([[1e-9]]), 1.0), 0.5e-18, delta=1e-30)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        for tau in (1.0, 0.1):
            for _ in range(50):
                X = rng.standard_normal((10, 10))
                numeric = numeric_gradient(lambda Y: charbonnier_value(Y, tau), X, h=1e-5)
                self.assertLessEqual(relative_error(charbonnier_grad(X, tau), numeric), 1e-6)

    def test_gradient_entries_below_one(self):
        X = np.array([[1e6, -1e6, 0.0]])
        grad = charbonnier_grad(X, 1e-3)
        self.assertTrue(np.all(np.abs(grad) < 1.0 + 1e-15))
        self.assertEqual(grad[0, 2], 0.0)

    def test_hessian_diagonal_bounds(self):
        for tau in (1.0, 1e-3):
            for X in random_matrices(12, 100):
                diag = charbonnier_hessian_diag(X, tau)
                self.assertTrue(np.all(diag > 0))
                self.assertTrue(np.all(diag <= (1.0 / tau) * (1 + 1e-12)))


class HuberTests(SimpleTestCase):
    def test_sandwich_bounds(self):
        for X in random_matrices(13, 300):
            tau = 0.1
            value = huber_value(X, tau)
            l1 = entrywise_l1_norm(X)
            slack = smoothing_slack(SmootherKind.HUBER, tau, *X.shape)
            self.assertLessEqual(value, l1 + ROUNDING * max(1.0, l1))
            self.assertGreaterEqual(value, l1 - slack - ROUNDING * max(1.0, l1))

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(14)
        for _ in range(100):
            X = rng.standard_normal((10, 10))
            numeric = numeric_gradient(lambda Y: huber_value(Y, 0.5), X, h=1e-6)
            self.assertLessEqual(relative_error(huber_grad(X, 0.5), numeric), 1e-6)


class LogsumexpTests(SimpleTestCase):
    def test_sandwich_bounds(self):
        for index, X in enumerate(random_matrices(20, 1000)):
            tau = (1.0, 0.1, 1e-3)[index % 3]
            value = logsumexp_value(X, tau)
            linf = entrywise_linf_norm(X)
            self.assertLessEqual(value, linf + ROUNDING * max(1.0, linf))
            self.assertGreaterEqual(value, linf - tau * math.log(2 * X.size) - ROUNDING * max(1.0, linf))

    def test_zero_matrix(self):
        self.assertEqual(logsumexp_value(np.zeros((4, 5)), 1e-3), 0.0)
        np.testing.assert_array_equal(logsumexp_grad(np.zeros((4, 5)), 1e-3), np.zeros((4, 5)))

    def test_large_entries_do_not_overflow(self):
        X = np.array([[1e3, -2e3], [5.0, 0.0]])
        value, grad = logsumexp_value_and_grad(X, 1e-3)
        self.assertTrue(math.isfinite(value))
        self.assertAlmostEqual(value, 2e3, delta=1e-3 * math.log(8) + 1e-9)
        self.assertAlmostEqual(grad[0, 1], -1.0)

    def test_gradient_lies_in_l1_ball(self):
        for X in random_matrices(21, 200):
            grad = logsumexp_grad(X, 0.1)
            self.assertLessEqual(np.abs(grad).sum(), 1.0 + 1e-12)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(22)
        for tau in (1.0, 0.1):
            for _ in range(50):
                X = rng.standard_normal((10, 10))
                numeric = numeric_gradient(lambda Y: logsumexp_value(Y, tau), X, h=1e-5)
                self.assertLessEqual(relative_error(logsumexp_grad(X, tau), numeric), 1e-6)

    def test_hessian_quadratic_form_bounds(self):
        rng = np.random.default_rng(23)
        for tau in (1.0, 0.01):
            for X in random_matrices(24, 100):
                Y = rng.standard_normal(X.shape)
                quad = logsumexp_hessian_quadform(X, tau, Y)
                self.assertGreaterEqual(quad, 0.0)
                self.assertLessEqual(quad, (np.sum(Y * Y) / tau) * (1 + 1e-12))

    def test_hessian_matches_gradient_differences(self):
        rng = np.random.default_rng(25)
        X, Y = rng.standard_normal((4, 3)), rng.standard_normal((4, 3))
        h = 1e-6
        directional = np.sum((logsumexp_grad(X + h * Y, 1.0) - logsumexp_grad(X - h * Y, 1.0)) * Y) / (2 * h)
        self.assertAlmostEqual(logsumexp_hessian_quadform(X, 1.0, Y), directional, places=6)


def explicit_logsumexp_hessian(X, tau):
    """The mn x mn Hessian (diag(p) - g g^T) / tau, p the +-entry weights and g the gradient."""
    scaled = X.ravel() / tau
    shift = np.abs(scaled).max()
    up, down = np.exp(scaled - shift), np.exp(-scaled - shift)
    total = np.sum(up + down)
    p, g = (up + down) / total, (up - down) / total
    return (np.diag(p) - np.outer(g, g)) / tau


class SmallTauGradientTests(SimpleTestCase):
    """Gradients at tau = 1e-3 against central differences with entry-scaled steps."""

    def test_gradients_match_scaled_differences(self):
        rng = np.random.default_rng(26)
        pairs = [
            (SmootherKind.CHARBONNIER, charbonnier_value, charbonnier_grad),
            (SmootherKind.HUBER, huber_value, huber_grad),
            (SmootherKind.LOGSUMEXP, logsumexp_value, logsumexp_grad),
        ]
        for kind, value, grad in pairs:
            for _ in range(20):
                X = rng.standard_normal((6, 5)) * rng.choice([1.0, 30.0])
                numeric = scaled_numeric_gradient(lambda Y: value(Y, 1e-3), X)
                with self.subTest(kind=kind):
                    self.assertLessEqual(relative_error(grad(X, 1e-3), numeric), 1e-5)


class CharbonnierHessianTests(SimpleTestCase):
    def test_diagonal_matches_gradient_differences(self):
        rng = np.random.default_rng(27)
        h = 1e-6
        for tau in (1.0, 0.1):
            for _ in range(20):
                X = rng.standard_normal((4, 4))
                numeric = (charbonnier_grad(X + h, tau) - charbonnier_grad(X - h, tau)) / (2 * h)
                np.testing.assert_allclose(charbonnier_hessian_diag(X, tau), numeric, rtol=1e-5, atol=1e-8)

    def test_diagonal_peak_is_the_lipschitz_constant(self):
        rng = np.random.default_rng(28)
        for tau in (1.0, 1e-2, 1e-3):
            X = rng.standard_normal(10 ** 4) * tau * 10
            X[0] = 0.0
            peak = float(charbonnier_hessian_diag(X, tau).max())
            bound = lipschitz_constant(SmootherKind.CHARBONNIER, tau)
            self.assertLessEqual(peak, bound * (1 + 1e-12))
            self.assertAlmostEqual(peak / bound, 1.0, places=12)


class LogsumexpHessianTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(29)

    def test_explicit_hessian_matches_gradient_differences(self):
        X = self.rng.standard_normal((3, 3))
        tau, h = 0.5, 1e-6
        numeric = np.empty((9, 9))
        for k in range(9):
            step = np.zeros(9)
            step[k] = h
            step = step.reshape(3, 3)
            numeric[:, k] = ((logsumexp_grad(X + step, tau) - logsumexp_grad(X - step, tau)) / (2 * h)).ravel()
        np.testing.assert_allclose(explicit_logsumexp_hessian(X, tau), numeric, atol=1e-6)

    def test_quadratic_form_matches_explicit_hessian(self):
        for tau in (1.0, 0.1, 0.01):
            X = self.rng.standard_normal((3, 3))
            H = explicit_logsumexp_hessian(X, tau)
            for _ in range(20):
                Y = self.rng.standard_normal((3, 3))
                expected = float(Y.ravel() @ H @ Y.ravel())
                self.assertAlmostEqual(
                    logsumexp_hessian_quadform(X, tau, Y), max(expected, 0.0),
                    delta=1e-9 * max(1.0, abs(expected)),
                )

    def test_explicit_hessian_spectrum(self):
        for tau in (1.0, 0.1, 0.01):
            for _ in range(20):
                X = self.rng.standard_normal((3, 3))
                eigenvalues = np.linalg.eigvalsh(explicit_logsumexp_hessian(X, tau))
                self.assertGreaterEqual(eigenvalues.min(), -1e-12 / tau)
                self.assertLessEqual(eigenvalues.max(), (1.0 / tau) * (1 + 1e-12))


class DispatchTests(SimpleTestCase):
    def test_dispatch_by_kind_name(self):
        X = np.array([[0.3, -1.2]])
        self.assertEqual(smoother_value('charbonnier', X, 0.1), charbonnier_value(X, 0.1))
        np.testing.assert_array_equal(smoother_grad(SmootherKind.LOGSUMEXP, X, 0.1), logsumexp_grad(X, 0.1))
        self.assertAlmostEqual(smoother_value('frobenius', X, 1.0), 0.765)

    def test_lipschitz_and_slack(self):
        self.assertEqual(lipschitz_constant(SmootherKind.CHARBONNIER, 1e-3), 1000.0)
        self.assertEqual(lipschitz_constant(SmootherKind.FROBENIUS, 1e-3), 1.0)
        self.assertAlmostEqual(smoothing_slack(SmootherKind.CHARBONNIER, 1e-3, 20, 30), 0.6)
        self.assertAlmostEqual(smoothing_slack(SmootherKind.LOGSUMEXP, 1e-3, 20, 30), 1e-3 * math.log(1200))

    def test_target_norms(self):
        self.assertEqual(SmootherKind.CHARBONNIER.target_norm, 1)
        self.assertEqual(SmootherKind.HUBER.target_norm, 1)
        self.assertEqual(SmootherKind.LOGSUMEXP.target_norm, math.inf)
