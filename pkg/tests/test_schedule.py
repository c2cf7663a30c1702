import numpy as np
import unittest
from scipy.integrate import quad
from scipy.stats import multivariate_normal
import geomdiff as gd
from geomdiff.schedule import transition_moments


class TestSchedule(unittest.TestCase):
    def setUp(self):
        self.schedule = gd.DiffusionSchedule()
        self.X = np.array([[0.0], [0.3], [0.6], [0.9]])
        self.K = gd.SquaredExponentialKernel(1.0, 1.0).gram(self.X)
        self.chol = gd.cholesky_with_jitter(self.K)

    def test_schedule_functions(self):
        for t in (0.0, 0.1, 0.5, 1.0):
            integral, _ = quad(lambda s: float(self.schedule.beta(s)), 0, t)
            self.assertAlmostEqual(float(self.schedule.B_integral(t)), integral, places=10)
            self.assertAlmostEqual(float(self.schedule.sigma(t) ** 2 + self.schedule.decay(t) ** 2), 1.0,
                                   places=12)
        grid = self.schedule.time_grid(10)
        self.assertEqual(len(grid), 11)
        self.assertEqual(grid[0], 1.0)
        self.assertEqual(grid[-1], self.schedule.eps_clip)
        with self.assertRaises(ValueError):
            self.schedule.time_grid(0)
        with self.assertRaises(ValueError):
            self.schedule.beta(1.5)
        with self.assertRaises(ValueError):
            gd.DiffusionSchedule(beta_min=2.0, beta_max=1.0)
        schedule = gd.DiffusionSchedule.from_dict(dict(beta_max=10.0, unknown=3))
        self.assertEqual(schedule.beta_max, 10.0)

    def test_conditional_score(self):
        rng = gd.RngStream(0)
        K = self.K + 0.1 * np.eye(4)
        chol = gd.cholesky_with_jitter(K)
        m = rng.normal(size=4)
        h = 1e-5
        for _ in range(50):
            t = rng.uniform(0.05, 1.0)
            Y0 = rng.normal(size=4)
            moments = transition_moments(self.schedule, t, Y0, m, K)
            Y_t = moments.mean + rng.normal(size=4) * moments.sigma
            density = multivariate_normal(moments.mean, moments.covariance)
            fd = np.array([(density.logpdf(Y_t + h * e) - density.logpdf(Y_t - h * e)) / (2 * h)
                           for e in np.eye(4)])
            analytic = gd.conditional_score(self.schedule, t, Y_t, Y0, m, chol)
            self.assertLess(np.linalg.norm(fd - analytic) / np.linalg.norm(analytic), 1e-5)
        with self.assertRaises(ValueError):
            gd.conditional_score(self.schedule, 0.0, Y_t, Y0, m, chol)

    def test_forward_moments_against_simulation(self):
        rng = gd.RngStream(1)
        paths = 20000
        t_end = 0.3
        Y0 = np.array([1.0, -0.5, 0.8, 0.2])
        m = np.zeros(4)
        final = np.broadcast_to(Y0, (paths, 4))
        grid = np.linspace(0.0, t_end, 2001)
        # in segments to keep the stored paths small
        for k in range(20):
            _, path = gd.simulate_forward_sde(self.schedule, final, m, self.chol, rng,
                                              times=grid[100 * k:100 * k + 101])
            final = path[-1]
        moments = transition_moments(self.schedule, t_end, Y0, m, self.K)
        standard_error = np.sqrt(np.diag(moments.covariance) / paths)
        self.assertTrue(np.all(np.abs(final.mean(axis=0) - moments.mean) < 3 * standard_error))
        self.assertTrue(np.allclose(np.cov(final, rowvar=False), moments.covariance, rtol=0.05))

    def test_marginal_moments(self):
        Sigma0 = 0.25 * self.K
        m0 = np.ones(4)
        m_T, Sigma_T = gd.marginal_moments(self.schedule, 1.0, m0, Sigma0, np.zeros(4), self.K)
        self.assertTrue(np.allclose(Sigma_T, self.K, atol=1e-2))
        self.assertTrue(np.all(np.abs(m_T) < 0.05))
        m_0, Sigma_0 = gd.marginal_moments(self.schedule, 0.0, m0, Sigma0, np.zeros(4), self.K)
        self.assertTrue(np.allclose(Sigma_0, Sigma0))
        self.assertTrue(np.allclose(m_0, m0))
        stationary = gd.exact_marginal_score(self.schedule, 0.4, np.ones(4), np.zeros(4), self.K, np.zeros(4),
                                             self.K)
        self.assertTrue(np.allclose(stationary, -np.ones(4)))

    def test_sigma_is_monotone(self):
        sigma = self.schedule.sigma(np.linspace(0.0, 1.0, 1001))
        self.assertEqual(sigma[0], 0.0)
        self.assertTrue(np.all(np.diff(sigma) > 0))
        self.assertGreaterEqual(float(self.schedule.sigma(self.schedule.T)), 0.999)

    def test_exact_score_against_posterior_mean(self):
        X = np.array([[0.0], [0.5], [1.2]])
        K = gd.SquaredExponentialKernel(1.0, 0.5).gram(X) + 0.05 * np.eye(3)
        Sigma0 = 0.5 * gd.SquaredExponentialKernel(1.0, 0.3).gram(X) + 0.01 * np.eye(3)
        rng = gd.RngStream(3)
        m0 = rng.normal(size=3)
        m = 0.2 * np.ones(3)
        for t in (0.05, 0.3, 0.8):
            decay, sigma = float(self.schedule.decay(t)), float(self.schedule.sigma(t))
            # joint law of (Y0, Y_t), conditioned on Y_t
            cross = decay * Sigma0
            Sigma_t = decay ** 2 * Sigma0 + sigma ** 2 * K
            m_t = decay * m0 + (1 - decay) * m
            Y_t = m_t + rng.normal(size=3)
            posterior_mean = m0 + cross @ np.linalg.solve(Sigma_t, Y_t - m_t)
            expected = -(Y_t - decay * posterior_mean - (1 - decay) * m) / sigma ** 2
            score = gd.exact_marginal_score(self.schedule, t, Y_t, m0, Sigma0, m, K)
            self.assertLess(np.max(np.abs(score - expected)), 1e-8)


if __name__ == '__main__':
    unittest.main()
