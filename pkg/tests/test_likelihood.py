import numpy as np
import unittest
import geomdiff as gd

NOISE_VAR = 0.01


class TestLikelihood(unittest.TestCase):
    def setUp(self):
        self.schedule = gd.DiffusionSchedule()
        self.data_kernel = gd.SquaredExponentialKernel(1.0, 0.5)
        self.kernel = gd.WhiteKernel()
        self.mean = gd.ZeroMean()
        self.score = gd.ExactGaussianScore(self.kernel, self.mean, self.schedule, self.data_kernel, gd.ZeroMean(),
                                           NOISE_VAR)
        self.ode = gd.SdeRunConfig(steps=1000)
        self.X = np.array([[-1.0], [-0.4], [0.2], [0.9]])
        self.y = np.array([[0.3], [-0.5], [0.1], [0.8]])

    def test_matches_closed_form(self):
        value = gd.log_likelihood(self.score, self.kernel, self.mean, self.X, self.y, self.ode)
        expected = gd.gp_loglik(self.data_kernel, gd.ZeroMean(), self.X, self.y, NOISE_VAR)
        self.assertAlmostEqual(value, expected, delta=1e-2)
        batch = gd.log_likelihood(self.score, self.kernel, self.mean, self.X, np.stack([self.y, -self.y]),
                                  gd.SdeRunConfig(steps=50))
        self.assertEqual(batch.shape, (2,))

    def test_conditional_matches_gp_posterior(self):
        X_c, y_c = self.X[:2], self.y[:2]
        X_t, y_t = self.X[2:], self.y[2:]
        value = gd.conditional_log_likelihood(self.score, self.kernel, self.mean, X_c, y_c, X_t, y_t, self.ode)
        expected = gd.gp_predictive_loglik(self.data_kernel, gd.ZeroMean(), X_c, y_c, X_t, y_t, NOISE_VAR)
        self.assertAlmostEqual(value, expected, delta=2e-2)
        self.assertEqual(gd.conditional_log_likelihood(self.score, self.kernel, self.mean, X_c, y_c,
                                                       np.zeros((0, 1)), np.zeros((0, 1))), 0.0)

    def test_exact_divergence(self):
        rng = gd.RngStream(0)
        Y = rng.normal(size=(3, 4, 1))
        for t in (0.05, 0.5):
            div = gd.divergence(self.score, t, self.X, Y)
            self.assertEqual(div.shape, (3,))
            self.assertTrue(np.allclose(div, self.score.divergence(t, self.X), atol=1e-10))

    def test_hutchinson_is_unbiased(self):
        rng = gd.RngStream(1)
        t = 0.3
        exact = self.score.divergence(t, self.X)
        for _ in range(10):
            Y = rng.normal(size=(4, 1))
            estimates = np.array([gd.divergence(self.score, t, self.X, Y, gd.DivergenceMode('hutchinson', 8), rng)
                                  for _ in range(200)])
            standard_error = estimates.std(ddof=1) / np.sqrt(len(estimates))
            self.assertLess(abs(estimates.mean() - exact), 4 * standard_error + 1e-12)

    def test_hutchinson_variance_falls_with_probes(self):
        rng = gd.RngStream(2)
        Y = rng.normal(size=(4, 1))
        spread = {}
        for probes in (2, 32):
            mode = gd.DivergenceMode('hutchinson', probes)
            spread[probes] = np.var([gd.divergence(self.score, 0.3, self.X, Y, mode, rng) for _ in range(300)])
        self.assertLess(spread[32], 0.25 * spread[2])

    def test_consistency_gap(self):
        X_a, y_a, X_b = self.X[:2], self.y[:2], self.X[2:]
        latent = gd.gp_condition(self.data_kernel, gd.ZeroMean(), X_a, y_a, X_b, NOISE_VAR)
        proposal = gd.GpPosterior(latent.mean, latent.covariance + NOISE_VAR * np.eye(2), 2, 2)
        gap = gd.consistency_gap(self.score, self.kernel, self.mean, X_a, y_a, X_b, proposal, num_proposals=32,
                                 ode_config=gd.SdeRunConfig(steps=500))
        self.assertLess(gap, 2e-2)

    def test_errors(self):
        with self.assertRaises(ValueError):
            gd.DivergenceMode('unknown')
        with self.assertRaises(ValueError):
            gd.DivergenceMode('hutchinson', 0)
        with self.assertRaises(ValueError):
            gd.log_likelihood(self.score, self.kernel, self.mean, self.X, self.y[:3])
        with self.assertRaises(ValueError):
            gd.log_likelihood(self.score, self.kernel, self.mean, self.X, np.full((4, 1), np.nan))


if __name__ == '__main__':
    unittest.main()
