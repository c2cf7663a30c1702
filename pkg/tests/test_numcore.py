import numpy as np
import unittest
from scipy.integrate import trapezoid
from scipy.stats import multivariate_normal
import geomdiff as gd


class TestNumcore(unittest.TestCase):
    def setUp(self):
        rng = gd.RngStream(3)
        A = rng.normal(size=(5, 5))
        self.A = A @ A.T + 0.5 * np.eye(5)
        self.chol = gd.cholesky_with_jitter(self.A)

    def test_rng_streams(self):
        a = gd.RngStream(11).normal(size=10)
        b = gd.RngStream(11).normal(size=10)
        self.assertTrue(np.array_equal(a, b))
        first, second = gd.RngStream(11).split(2)
        self.assertFalse(np.allclose(first.normal(size=10), second.normal(size=10)))
        signs = gd.RngStream(0).rademacher(size=1000)
        self.assertTrue(set(np.unique(signs)) == {-1.0, 1.0})

    def test_cholesky_helpers(self):
        b = gd.RngStream(1).normal(size=(3, 5))
        self.assertEqual(self.chol.jitter_used, 0.0)
        self.assertTrue(np.allclose(self.chol.solve(b), np.linalg.solve(self.A, b.T).T))
        self.assertTrue(np.allclose(self.chol.matvec(self.chol.solve_lower(b)), b))
        self.assertTrue(np.allclose(self.chol.matrix(), self.A))
        self.assertAlmostEqual(self.chol.logdet(), np.linalg.slogdet(self.A)[1], places=10)
        with self.assertRaises(ValueError):
            self.chol.solve(np.ones(4))

    def test_jitter_ladder(self):
        singular = np.ones((4, 4))
        chol = gd.cholesky_with_jitter(singular)
        self.assertGreater(chol.jitter_used, 0)
        self.assertTrue(np.allclose(chol.matrix(), singular, atol=1e-5))
        with self.assertRaises(gd.NotPositiveDefiniteError):
            gd.cholesky_with_jitter(-np.eye(3))
        with self.assertRaises(ValueError):
            gd.cholesky_with_jitter(np.ones((2, 3)))

    def test_mvn(self):
        rng = gd.RngStream(5)
        mean = np.arange(5.0)
        y = rng.normal(size=(7, 5))
        expected = multivariate_normal(mean, self.A).logpdf(y)
        self.assertTrue(np.allclose(gd.mvn_logpdf(y, mean, self.chol), expected))
        draws = gd.mvn_sample(mean, self.chol, rng, size=20000)
        self.assertEqual(draws.shape, (20000, 5))
        fitted_mean, fitted_cov = gd.fit_gaussian(draws)
        self.assertTrue(np.allclose(fitted_cov, self.A, atol=0.15 * np.max(np.abs(self.A))))
        self.assertLess(np.max(np.abs(fitted_mean - mean)), 0.1)

    def test_known_factor(self):
        chol = gd.cholesky_with_jitter(np.array([[4.0, 2.0], [2.0, 3.0]]))
        self.assertTrue(np.allclose(chol.lower, [[2.0, 0.0], [1.0, np.sqrt(2.0)]], rtol=0, atol=1e-14))
        self.assertEqual(chol.jitter_used, 0.0)

    def test_logpdf_integrates_to_one(self):
        grid = np.linspace(-12.0, 14.0, 20001)
        chol = gd.cholesky_with_jitter(np.array([[2.5]]))
        density = np.exp(gd.mvn_logpdf(grid[:, None], np.array([1.0]), chol))
        self.assertAlmostEqual(trapezoid(density, grid), 1.0, delta=1e-4)

    def test_sample_with_zero_factor(self):
        mean = np.array([1.0, -2.0, 0.5])
        draws = gd.mvn_sample(mean, gd.CholeskyFactor(np.zeros((3, 3))), gd.RngStream(2), size=4)
        self.assertTrue(np.array_equal(draws, np.broadcast_to(mean, (4, 3))))

    def test_sample_covariance(self):
        Sigma = np.array([[1.0, 0.5], [0.5, 1.0]])
        draws = gd.mvn_sample(np.zeros(2), gd.cholesky_with_jitter(Sigma), gd.RngStream(9), size=100000)
        self.assertTrue(np.allclose(np.cov(draws, rowvar=False), Sigma, rtol=0, atol=0.05))

    def test_gaussian_kl(self):
        self.assertAlmostEqual(gd.gaussian_kl(np.zeros(5), self.A, np.zeros(5), self.A), 0.0, places=10)
        # KL(N(0, 1) || N(1, 2)) = (1/2)(1/2 + 1/2 - 1 + log 2)
        kl = gd.gaussian_kl(np.zeros(1), np.eye(1), np.ones(1), 2 * np.eye(1))
        self.assertAlmostEqual(kl, 0.5 * np.log(2.0), places=12)
        self.assertGreater(gd.gaussian_kl(np.ones(5), self.A, np.zeros(5), self.A), 0)


if __name__ == '__main__':
    unittest.main()
