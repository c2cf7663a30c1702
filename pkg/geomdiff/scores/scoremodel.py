from abc import ABC, abstractmethod
import numpy as np

from ..exceptions import check_finite
from ..kernels import as_points
from ..numcore import cholesky_with_jitter
from ..schedule import marginal_moments
from ..networks.autodiff import Tensor
from .parametrization import wrap_network, to_preconditioned_score

MAX_CACHE_ENTRIES = 64


def _key(X, *extra):
    X = np.ascontiguousarray(X, dtype=float)
    return (X.shape, X.tobytes()) + tuple(extra)


class ScoreModel(ABC):
    '''Preconditioned score (t, X, Y) ↦ K(X, X) ∇_Y log p_t(Y | X).

    Y has shape (..., n, d) and the result has the same shape. Every call to `__call__` or
    `vjp` increments `num_evaluations`.
    '''
    is_smooth = True

    def __init__(self, kernel, mean, schedule):
        self.kernel = kernel
        self.mean = mean
        self.schedule = schedule
        self.num_evaluations = 0
        self._prior_cache = {}

    def prior(self, X):
        '''Stacked limiting mean, gram K(X, X) and its Cholesky factor, cached per input set.'''
        key = _key(X)
        if key not in self._prior_cache:
            if len(self._prior_cache) >= MAX_CACHE_ENTRIES:
                self._prior_cache.clear()
            X = as_points(X)
            K = self.kernel.gram(X)
            self._prior_cache[key] = (self.mean(X).reshape(-1), K, cholesky_with_jitter(K))
        return self._prior_cache[key]

    def _check(self, X, Y):
        X = as_points(X)
        Y = np.asarray(Y, dtype=float)
        if Y.ndim < 2 or Y.shape[-2] != X.shape[0]:
            raise ValueError("Y must have shape (..., n, d) with n = " + str(X.shape[0]) + ", got " + str(Y.shape))
        return X, Y

    def __call__(self, t, X, Y):
        X, Y = self._check(X, Y)
        self.num_evaluations += 1
        return self.evaluate(float(t), X, Y)

    def vjp(self, t, X, Y, V):
        '''Score and the vector-Jacobian products Vᵀ ∂score/∂Y.

        Parameters
        ----------
        V: np.array
            Cotangents of shape (P,) + Y.shape, one per probe

        Returns
        -------
        score: np.array
            Same shape as Y
        grads: np.array
            Same shape as V
        '''
        X, Y = self._check(X, Y)
        V = np.asarray(V, dtype=float)
        if V.shape[1:] != Y.shape:
            raise ValueError("cotangents must have shape (P,) + Y.shape")
        self.num_evaluations += 1
        return self.evaluate_vjp(float(t), X, Y, V)

    @abstractmethod
    def evaluate(self, t, X, Y):
        pass

    @abstractmethod
    def evaluate_vjp(self, t, X, Y, V):
        pass


class ExactGaussianScore(ScoreModel):
    '''Closed-form score when the data process is the Gaussian process GP(m0, k0) plus noise.

    The data kernel and mean default to the limiting ones, giving the stationary case where the
    score is −(Y − m) at every t.
    '''

    def __init__(self, kernel, mean, schedule, data_kernel=None, data_mean=None, data_noise_var=0.0):
        ScoreModel.__init__(self, kernel, mean, schedule)
        self.data_kernel = kernel if data_kernel is None else data_kernel
        self.data_mean = mean if data_mean is None else data_mean
        self.data_noise_var = float(data_noise_var)
        self._marginal_cache = {}

    def data_moments(self, X):
        X = as_points(X)
        Sigma0 = self.data_kernel.gram(X) + self.data_noise_var * np.eye(X.shape[0] * self.kernel.output_dim)
        return self.data_mean(X).reshape(-1), Sigma0

    def marginal(self, t, X):
        '''(m_t, Σ_t Cholesky factor, K) at time t, cached for the last few (X, t) pairs.'''
        key = _key(X, t)
        if key not in self._marginal_cache:
            if len(self._marginal_cache) >= MAX_CACHE_ENTRIES:
                self._marginal_cache.clear()
            m, K, _ = self.prior(X)
            m0, Sigma0 = self.data_moments(X)
            m_t, Sigma_t = marginal_moments(self.schedule, t, m0, Sigma0, m, K)
            self._marginal_cache[key] = (m_t, cholesky_with_jitter(Sigma_t), K)
        return self._marginal_cache[key]

    def evaluate(self, t, X, Y):
        m_t, chol, K = self.marginal(t, X)
        flat = Y.reshape(Y.shape[:-2] + (-1,))
        return (-chol.solve(flat - m_t) @ K).reshape(Y.shape)

    def evaluate_vjp(self, t, X, Y, V):
        _, chol, K = self.marginal(t, X)
        flat_V = V.reshape(V.shape[:-2] + (-1,))
        return self.evaluate(t, X, Y), (-chol.solve(flat_V @ K)).reshape(V.shape)

    def divergence(self, t, X):
        '''Exact divergence −tr(K Σ_t⁻¹), identical for every Y.'''
        _, chol, K = self.marginal(t, X)
        return -float(np.trace(chol.solve(K)))


class NetworkScore(ScoreModel):
    '''A trained ScoreNetwork read through a Parametrization.'''

    def __init__(self, network, parametrization, kernel, mean, schedule):
        ScoreModel.__init__(self, kernel, mean, schedule)
        self.network = network
        self.parametrization = parametrization

    def forward(self, t, X, Y):
        '''Tape evaluation: Y of shape (B, n, d) (array or Tensor) to a flat Tensor (B, n*d).'''
        m, K, chol = self.prior(X)
        batch = Y.shape[0]
        F = self.network(np.full(batch, t), X, Y).reshape(batch, -1)
        Y_flat = Y.reshape(batch, -1)
        D = wrap_network(self.parametrization, F, t, Y_flat)
        return to_preconditioned_score(self.parametrization, D, t, Y_flat, self.schedule, K, m, chol)

    def evaluate(self, t, X, Y):
        batch_shape = Y.shape[:-2]
        out = self.forward(t, X, Y.reshape((-1,) + Y.shape[-2:])).value
        check_finite(out, "network score")
        return out.reshape(batch_shape + Y.shape[-2:])

    def evaluate_vjp(self, t, X, Y, V):
        tiled = np.broadcast_to(Y, V.shape).reshape((-1,) + Y.shape[-2:])
        leaf = Tensor(tiled, requires_grad=True)
        out = self.forward(t, X, leaf)
        out.backward(V.reshape(out.shape))
        self.network.zero_grad()
        score = out.value.reshape(V.shape)[0]
        return score, leaf.grad.reshape(V.shape)


def score_forward(model, t, X, Y):
    return model(t, X, Y)
