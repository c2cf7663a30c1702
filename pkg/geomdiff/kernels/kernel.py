from abc import ABC, abstractmethod
from dataclasses import dataclass, asdict, field
import numpy as np


@dataclass
class KernelSpec:
    '''Serializable description of a covariance function.

    `family` is one of the registered `kernel_name` values. `base` names the scalar family of a
    `diagonal` kernel. `lengthscales` is only read by the anisotropic negative-control kernel.
    '''
    family: str = 'squared_exponential'
    variance: float = 1.0
    lengthscale: float = 1.0
    period: float = 1.0
    envelope_lengthscale: float = 1.0
    output_dim: int = 1
    base: str = 'squared_exponential'
    lengthscales: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)


def as_points(X):
    '''Returns inputs as an (n, dx) float array; 1-d inputs become a column.'''
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X[:, None]
    return X


def pairwise_differences(X, X2):
    return X[:, None, :] - X2[None, :, :]


class Kernel(ABC):
    '''A covariance function k(x, x') returning d×d blocks.

    Subclasses implement `_blocks`, which maps two point sets of shapes (n, dx) and (m, dx) to an
    (n, m, d, d) array of blocks. Gram matrices are laid out point-major: entry (i*d + a, j*d + b)
    holds k(x_i, x_j)[a, b].
    '''
    kernel_name = None
    is_equivariant = False

    def __init__(self, variance=1.0, lengthscale=1.0, output_dim=1):
        if variance <= 0 or lengthscale <= 0:
            raise ValueError("kernel variance and lengthscale must be positive")
        self.variance = float(variance)
        self.lengthscale = float(lengthscale)
        self.output_dim = int(output_dim)

    @abstractmethod
    def _blocks(self, X, X2):
        pass

    def _check_inputs(self, X):
        X = as_points(X)
        return X

    def __call__(self, x, x2):
        '''Evaluates the d×d covariance block between two single points.'''
        x = np.atleast_1d(np.asarray(x, dtype=float)).reshape(1, -1)
        x2 = np.atleast_1d(np.asarray(x2, dtype=float)).reshape(1, -1)
        if x.shape[1] != x2.shape[1]:
            raise ValueError("dimension mismatch between kernel inputs")
        return self._blocks(self._check_inputs(x), self._check_inputs(x2))[0, 0]

    def gram(self, X, X2=None):
        '''Block gram matrix K(X, X2) of shape (n*d, m*d).

        Parameters
        ----------
        X: np.array
            First point set (n, dx) or (n,)
        X2: np.array
            Second point set; defaults to X, in which case the result is symmetrised

        Returns
        -------
        K: np.array
        '''
        X = self._check_inputs(X)
        symmetric = X2 is None
        X2 = X if symmetric else self._check_inputs(X2)
        if X.shape[1] != X2.shape[1]:
            raise ValueError("dimension mismatch between point sets")
        blocks = self._blocks(X, X2)
        n, m, d, _ = blocks.shape
        K = blocks.transpose(0, 2, 1, 3).reshape(n * d, m * d)
        if symmetric:
            K = 0.5 * (K + K.T)
        return K

    def to_spec(self):
        return KernelSpec(family=self.kernel_name, variance=self.variance, lengthscale=self.lengthscale,
                          output_dim=self.output_dim)


class ScalarKernel(Kernel):
    '''Stationary isotropic kernel k(x, x') = σ² f(‖x − x'‖); blocks are 1×1.'''

    @abstractmethod
    def profile(self, r):
        pass

    def _blocks(self, X, X2):
        r = np.sqrt(np.sum(pairwise_differences(X, X2) ** 2, axis=-1))
        return self.profile(r)[:, :, None, None]


def gram(kernel, mean, X):
    '''Stacked mean vector and block gram matrix over X.

    Returns
    -------
    mean_vector: np.array
        Shape (n*d,)
    K: np.array
        Shape (n*d, n*d)
    '''
    X = as_points(X)
    if X.shape[0] == 0:
        raise ValueError("gram needs a nonempty point set")
    return mean(X).reshape(-1), kernel.gram(X)
