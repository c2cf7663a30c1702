import numpy as np
import unittest
import geomdiff as gd


class TestKernels(unittest.TestCase):
    def setUp(self):
        self.rng = gd.RngStream(0)
        self.vector_kernels = [
            gd.DiagonalKernel(gd.SquaredExponentialKernel(1.0, 1.5), output_dim=2),
            gd.CurlFreeKernel(1.0, 1.5, output_dim=2),
            gd.DivFreeKernel(1.0, 1.5, output_dim=2),
        ]

    def test_scalar_kernels(self):
        x, x2 = np.array([0.0]), np.array([1.0])
        self.assertAlmostEqual(gd.SquaredExponentialKernel(2.0, 1.0)(x, x2)[0, 0], 2.0 * np.exp(-0.5))
        s = np.sqrt(5.0) / 0.5
        self.assertAlmostEqual(gd.Matern52Kernel(1.0, 0.5)(x, x2)[0, 0], (1 + s + s ** 2 / 3) * np.exp(-s))
        self.assertAlmostEqual(gd.PeriodicKernel(1.0, 1.0, period=0.5)(x, x2)[0, 0], 1.0)
        X = np.linspace(0, 1, 5)
        self.assertTrue(np.allclose(gd.WhiteKernel().gram(X), np.eye(5)))
        with self.assertRaises(ValueError):
            gd.SquaredExponentialKernel(-1.0)

    def test_gram_layout(self):
        kernel = gd.CurlFreeKernel(1.0, 1.0, output_dim=2)
        X = self.rng.normal(size=(3, 2))
        K = kernel.gram(X)
        self.assertEqual(K.shape, (6, 6))
        self.assertTrue(np.allclose(K[0:2, 4:6], kernel(X[0], X[2])))
        self.assertTrue(np.allclose(K, K.T))
        cross = kernel.gram(X, X[:2])
        self.assertEqual(cross.shape, (6, 4))
        with self.assertRaises(ValueError):
            kernel.gram(self.rng.normal(size=(3, 3)))
        for kernel in self.vector_kernels:
            eigenvalues = np.linalg.eigvalsh(kernel.gram(self.rng.normal(size=(6, 2))))
            self.assertGreater(eigenvalues.min(), -1e-10)

    def test_equivariance(self):
        for kernel in self.vector_kernels:
            self.assertTrue(kernel.is_equivariant)
            self.assertLess(gd.check_kernel_equivariance(kernel, 50, self.rng), 1e-10)
        scalar = gd.SquaredExponentialKernel(1.0, 0.7)
        self.assertLess(gd.check_kernel_equivariance(scalar, 50, self.rng, dim=3), 1e-10)
        control = gd.AnisotropicSquaredExponentialKernel(1.0, (0.5, 2.0), output_dim=2)
        self.assertFalse(control.is_equivariant)
        self.assertGreater(gd.check_kernel_equivariance(control, 50, self.rng), 1e-3)

    def test_stationarity(self):
        kernels = self.vector_kernels + [gd.WhiteKernel(), gd.SquaredExponentialKernel(1.0, 0.7),
                                         gd.Matern52Kernel(1.0, 0.5), gd.PeriodicKernel(1.0, 1.0, period=0.5),
                                         gd.WeaklyPeriodicKernel(1.5, 0.8, 0.5, 2.0),
                                         gd.AnisotropicSquaredExponentialKernel(1.0, (0.5, 2.0), output_dim=2)]
        for kernel in kernels:
            worst = 0.0
            for _ in range(20):
                x, x2, u = self.rng.normal(size=2), self.rng.normal(size=2), 2 * self.rng.normal(size=2)
                worst = max(worst, float(np.max(np.abs(kernel(x + u, x2 + u) - kernel(x, x2)))))
            self.assertLess(worst, 1e-12, kernel.kernel_name)

    def test_divergence_and_curl(self):
        div_free, curl_free, diagonal = self.vector_kernels[2], self.vector_kernels[1], self.vector_kernels[0]
        worst_div, worst_curl, control = 0.0, 0.0, 0.0
        for _ in range(20):
            x, x2, v = self.rng.normal(size=2), self.rng.normal(size=2), self.rng.normal(size=2)
            worst_div = max(worst_div, abs(gd.divergence_of_kernel_column(div_free, x2, v, x)))
            worst_curl = max(worst_curl, abs(gd.divergence_of_kernel_column(curl_free, x2, v, x)))
            control = max(control, abs(gd.divergence_of_kernel_column(diagonal, x2, v, x)))
        self.assertLess(worst_div, 1e-5)
        self.assertLess(worst_curl, 1e-5)
        self.assertGreater(control, 1e-3)

    def test_specs(self):
        X = self.rng.normal(size=(4, 2))
        kernels = self.vector_kernels + [gd.WeaklyPeriodicKernel(1.5, 0.8, 0.5, 2.0),
                                         gd.AnisotropicSquaredExponentialKernel(1.0, (0.5, 2.0))]
        for kernel in kernels:
            spec = gd.KernelSpec.from_dict(kernel.to_spec().to_dict())
            rebuilt = gd.kernel_from_spec(spec)
            self.assertEqual(type(rebuilt), type(kernel))
            self.assertTrue(np.allclose(rebuilt.gram(X), kernel.gram(X)))
        with self.assertRaises(ValueError):
            gd.kernel_from_spec(gd.KernelSpec(family='unknown'))
        self.assertEqual(set(gd.kernel_dict), {k.kernel_name for k in gd.kernel_full_list})

    def test_means(self):
        X = np.array([[0.0], [1.0], [2.1]])
        table = gd.TableMean([[0.0], [2.0]], [[1.0], [3.0]])
        self.assertTrue(np.allclose(table(X), [[1.0], [1.0], [3.0]]))
        rebuilt = gd.mean_from_spec(table.to_spec().to_dict())
        self.assertTrue(np.allclose(rebuilt(X), table(X)))
        self.assertTrue(np.allclose(gd.ConstantMean(2.0, output_dim=2)(X), 2.0 * np.ones((3, 2))))
        self.assertTrue(np.allclose(gd.ZeroMean(2)(X), np.zeros((3, 2))))
        with self.assertRaises(ValueError):
            gd.LinearMean(2)(X)
        with self.assertRaises(NotImplementedError):
            gd.CallableMean(lambda x: x).to_spec()
        self.assertTrue(np.allclose(gd.CallableMean(lambda x: 2 * x)(X), 2 * X))


if __name__ == '__main__':
    unittest.main()
