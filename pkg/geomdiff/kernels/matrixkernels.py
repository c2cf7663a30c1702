import numpy as np

from .kernel import Kernel, as_points, pairwise_differences


def _se_profile(sq_dist, variance, lengthscale):
    return variance * np.exp(-0.5 * sq_dist / lengthscale ** 2)


def _equivariant_blocks(kind, diff, variance, lengthscale):
    n = diff.shape[-1]
    sq_dist = np.sum(diff ** 2, axis=-1)
    outer = diff[..., :, None] * diff[..., None, :] / lengthscale ** 2
    eye = np.eye(n)
    if kind == 'curl_free':
        shape = eye - outer
    elif kind == 'div_free':
        shape = outer + (n - 1 - sq_dist / lengthscale ** 2)[..., None, None] * eye
    else:
        raise ValueError("unknown equivariant kernel kind: " + str(kind))
    return _se_profile(sq_dist, variance, lengthscale)[..., None, None] * shape


def equivariant_block(kind, x, x2, variance=1.0, lengthscale=1.0):
    '''n×n block k₀(x, x') A(x, x') (curl_free) or k₀(x, x') B(x, x') (div_free) with an SE base k₀.

    A = I − δδᵀ/ℓ² and B = δδᵀ/ℓ² + (n − 1 − ‖δ‖²/ℓ²) I, where δ = x − x'.
    '''
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    if x.shape != x2.shape:
        raise ValueError("dimension mismatch between kernel inputs")
    return _equivariant_blocks(kind, x - x2, variance, lengthscale)


class VectorKernel(Kernel):
    '''Matrix-valued kernel on ℝⁿ inputs with n-dimensional outputs.'''

    def _check_inputs(self, X):
        X = as_points(X)
        if X.shape[1] != self.output_dim:
            raise ValueError("inputs of dimension " + str(X.shape[1]) + " given to a kernel with output_dim " +
                             str(self.output_dim))
        return X


class EquivariantVectorKernel(VectorKernel):
    is_equivariant = True

    def __init__(self, variance=1.0, lengthscale=1.0, output_dim=2):
        VectorKernel.__init__(self, variance, lengthscale, output_dim)

    def _blocks(self, X, X2):
        return _equivariant_blocks(self.kernel_name, pairwise_differences(X, X2), self.variance, self.lengthscale)


class CurlFreeKernel(EquivariantVectorKernel):
    kernel_name = 'curl_free'


class DivFreeKernel(EquivariantVectorKernel):
    kernel_name = 'div_free'


class DiagonalKernel(Kernel):
    '''k₀(x, x') I_d for a scalar base kernel k₀; equivariant for any isotropic base.'''
    kernel_name = 'diagonal'
    is_equivariant = True

    def __init__(self, base_kernel, output_dim=2):
        Kernel.__init__(self, base_kernel.variance, base_kernel.lengthscale, output_dim)
        self.base_kernel = base_kernel

    def _blocks(self, X, X2):
        scalar = self.base_kernel._blocks(X, X2)[:, :, 0, 0]
        return scalar[:, :, None, None] * np.eye(self.output_dim)

    def to_spec(self):
        spec = self.base_kernel.to_spec()
        spec.base = spec.family
        spec.family = self.kernel_name
        spec.output_dim = self.output_dim
        return spec


class AnisotropicSquaredExponentialKernel(Kernel):
    '''SE kernel with one lengthscale per input axis and identity output blocks.

    Not rotation equivariant unless all lengthscales agree; used as a negative control.
    '''
    kernel_name = 'anisotropic_squared_exponential'

    def __init__(self, variance=1.0, lengthscales=(1.0, 2.0), output_dim=2):
        lengthscales = np.asarray(lengthscales, dtype=float)
        Kernel.__init__(self, variance, float(np.mean(lengthscales)), output_dim)
        self.lengthscales = lengthscales

    def _blocks(self, X, X2):
        scaled = pairwise_differences(X, X2) / self.lengthscales
        scalar = self.variance * np.exp(-0.5 * np.sum(scaled ** 2, axis=-1))
        return scalar[:, :, None, None] * np.eye(self.output_dim)

    def to_spec(self):
        spec = Kernel.to_spec(self)
        spec.lengthscales = [float(l) for l in self.lengthscales]
        return spec


def divergence_of_kernel_column(kernel, x2, v, x, h=1e-4):
    '''Central finite-difference divergence of x ↦ k(x, x') v.

    For a curl-free kernel the curl is returned instead: the scalar ∂f₂/∂x₁ − ∂f₁/∂x₂ in two
    dimensions, the norm of the curl vector in three.
    '''
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    v = np.asarray(v, dtype=float)
    n = x.shape[0]

    def column(point):
        return kernel(point, x2) @ v

    jac = np.zeros((n, n))
    for a in range(n):
        step = np.zeros(n)
        step[a] = h
        jac[:, a] = (column(x + step) - column(x - step)) / (2 * h)
    if isinstance(kernel, CurlFreeKernel):
        if n == 2:
            return float(jac[1, 0] - jac[0, 1])
        if n == 3:
            curl = np.array([jac[2, 1] - jac[1, 2], jac[0, 2] - jac[2, 0], jac[1, 0] - jac[0, 1]])
            return float(np.linalg.norm(curl))
        raise ValueError("curl is only defined in two or three dimensions")
    return float(np.trace(jac))
