import numpy as np
import unittest
import geomdiff as gd
from geomdiff.symmetry import random_orthogonal, act_on_field, permute_field, conjugate_sqrt_gram


class TestGroupElements(unittest.TestCase):
    def setUp(self):
        self.rng = gd.RngStream(21)

    def test_compose_and_inverse(self):
        g = gd.random_group_element(self.rng, 2)
        f = gd.random_group_element(self.rng, 2)
        X = self.rng.normal(size=(5, 2))
        self.assertTrue(np.allclose(g.compose(f).apply(X), g.apply(f.apply(X))))
        self.assertTrue(np.allclose(g.compose(g.inverse()).apply(X), X))
        Y = self.rng.normal(size=(5, 2))
        self.assertTrue(np.allclose(g.rho_inverse(g.rho(Y)), Y))
        self.assertTrue(np.allclose((g.rep_matrix(5) @ Y.reshape(-1)).reshape(5, 2), g.rho(Y)))
        identity = gd.GroupElement.identity(3)
        self.assertTrue(np.allclose(identity.apply(np.ones((2, 3))), 1.0))

    def test_representations(self):
        h = random_orthogonal(self.rng, 3)
        self.assertTrue(np.allclose(h.T @ h, np.eye(3)))
        self.assertAlmostEqual(abs(np.linalg.det(h)), 1.0)
        scalar = gd.GroupElement(np.zeros(2), random_orthogonal(self.rng, 2), rep='trivial')
        Y = self.rng.normal(size=(4, 1))
        self.assertTrue(np.array_equal(scalar.rho(Y), Y))
        self.assertTrue(np.allclose(scalar.rep_matrix(4, 1), np.eye(4)))
        with self.assertRaises(ValueError):
            gd.GroupElement(np.zeros(2), np.array([[1.0, 0.1], [0.0, 1.0]]))
        with self.assertRaises(ValueError):
            gd.GroupElement(np.zeros(2), np.eye(2), rep='spin')

    def test_field_actions(self):
        g = gd.random_group_element(self.rng, 2)
        X = self.rng.normal(size=(3, 2))
        Y = self.rng.normal(size=(3, 2))
        gX, gY = act_on_field(g, X, Y, rep='trivial')
        self.assertTrue(np.array_equal(gY, Y))
        self.assertTrue(np.allclose(gX, g.apply(X)))
        pX, pY = permute_field([2, 0, 1], X, Y)
        self.assertTrue(np.array_equal(pX[0], X[2]))
        self.assertTrue(np.array_equal(pY[1], Y[0]))


class TestScoreSymmetry(unittest.TestCase):
    def setUp(self):
        self.rng = gd.RngStream(22)
        self.schedule = gd.DiffusionSchedule()
        self.kernel = gd.DiagonalKernel(gd.WhiteKernel(), output_dim=2)
        self.mean = gd.ZeroMean(2)
        self.score = gd.ExactGaussianScore(self.kernel, self.mean, self.schedule,
                                           gd.DivFreeKernel(1.0, 1.5, output_dim=2), gd.ZeroMean(2), 0.01)

    def test_exact_score_equivariance(self):
        self.assertLess(gd.check_score_equivariance(self.score, 20, self.rng), 1e-9)
        self.assertLess(gd.check_permutation_equivariance(self.score, 10, self.rng, n_points=5, x_dim=2, y_dim=2),
                        1e-10)
        control = gd.ExactGaussianScore(self.kernel, self.mean, self.schedule,
                                        gd.AnisotropicSquaredExponentialKernel(1.0, (0.5, 2.0), output_dim=2),
                                        gd.ZeroMean(2), 0.01)
        self.assertGreater(gd.check_score_equivariance(control, 20, self.rng), 1e-3)

    def test_pathwise_conjugacy(self):
        g = gd.random_group_element(self.rng, 2)
        X = 2 * self.rng.normal(size=(4, 2))
        config = gd.SdeRunConfig(steps=100)
        base = gd.reverse_sde_sample(self.score, self.kernel, self.mean, X, config, gd.RngStream(5), num_samples=3)
        moved = gd.reverse_sde_sample(self.score, self.kernel, self.mean, g.apply(X), config, gd.RngStream(5),
                                      num_samples=3, sqrt_gram=conjugate_sqrt_gram(g, self.kernel, X))
        self.assertTrue(np.allclose(moved, g.rho(base), atol=1e-7))

    def test_conditional_equivariance(self):
        for kernel in (gd.DivFreeKernel(1.0, 1.5, output_dim=2), gd.CurlFreeKernel(1.0, 1.5, output_dim=2)):
            self.assertLess(gd.check_conditional_equivariance(kernel, gd.ZeroMean(2), 20, self.rng, noise_var=0.01),
                            1e-9)
        scalar = gd.SquaredExponentialKernel(1.0, 0.7)
        self.assertLess(gd.check_conditional_equivariance(scalar, gd.ZeroMean(), 20, self.rng, dim=3), 1e-9)
        control = gd.AnisotropicSquaredExponentialKernel(1.0, (0.5, 2.0), output_dim=2)
        self.assertGreater(gd.check_conditional_equivariance(control, gd.ZeroMean(2), 20, self.rng, noise_var=0.01),
                           1e-3)


class TestDistributionalInvariance(unittest.TestCase):
    def setUp(self):
        self.rng = gd.RngStream(23)
        self.kernel = gd.SquaredExponentialKernel(1.0, 1.0)
        self.X = np.array([[-0.5, 0.2], [0.6, -0.4]])
        self.g = gd.random_group_element(self.rng, 2, rep='trivial')

    def prior(self, mean):
        return lambda X, rng, n: gd.gp_sample(self.kernel, mean, X, 0.0, rng, size=n)

    def test_gp_prior(self):
        report = gd.check_distributional_invariance(self.prior(gd.ZeroMean()), self.g, 10000, self.X, seed=3)
        self.assertEqual(set(report), {'max_mean_z', 'max_cov_z', 'max_z'})
        self.assertLess(report['max_z'], 3.0)

    def test_exact_score_reverse_sde(self):
        score = gd.ExactGaussianScore(gd.WhiteKernel(), gd.ZeroMean(), gd.DiffusionSchedule(), self.kernel,
                                      gd.ZeroMean(), 0.01)

        def sampler(X, rng, n):
            return gd.reverse_sde_sample(score, score.kernel, score.mean, X, gd.SdeRunConfig(steps=50), rng, n)
        self.assertLess(gd.check_distributional_invariance(sampler, self.g, 10000, self.X, seed=3)['max_z'], 3.0)

    def test_linear_mean_is_not_invariant(self):
        shift = gd.GroupElement(np.array([2.0]), np.eye(1), rep='trivial')
        report = gd.check_distributional_invariance(self.prior(gd.LinearMean(1)), shift, 10000,
                                                    np.array([[-0.5], [0.6]]), seed=3)
        self.assertGreater(report['max_mean_z'], 10.0)

    def test_arms_use_independent_draws(self):
        report = gd.check_distributional_invariance(self.prior(gd.ZeroMean()), gd.GroupElement.identity(2, 'trivial'),
                                                    500, self.X, seed=4)
        self.assertGreater(report['max_z'], 0.0)


if __name__ == '__main__':
    unittest.main()
