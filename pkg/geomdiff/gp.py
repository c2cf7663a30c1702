from dataclasses import dataclass
import numpy as np

from .numcore import cholesky_with_jitter, mvn_sample, mvn_logpdf
from .kernels import as_points


@dataclass
class GpPosterior:
    '''Gaussian over the stacked (point-major) outputs at the target inputs.'''
    mean: np.ndarray
    covariance: np.ndarray
    context_count: int
    target_count: int

    def diagonal(self):
        '''Same marginals with every cross-covariance dropped.'''
        return GpPosterior(self.mean.copy(), np.diag(np.diag(self.covariance)), self.context_count,
                           self.target_count)

    def cholesky(self):
        return cholesky_with_jitter(self.covariance)

    def logpdf(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.mean.shape[0]:
            y = y.reshape(y.shape[:-2] + (-1,))
        return mvn_logpdf(y, self.mean, self.cholesky())

    def sample(self, rng, size=None):
        return mvn_sample(self.mean, self.cholesky(), rng, size)


def _flat(y):
    return np.asarray(y, dtype=float).reshape(-1)


def _noisy_gram(kernel, X, noise_var):
    if noise_var < 0:
        raise ValueError("noise_var must be non-negative")
    K = kernel.gram(X)
    return K + noise_var * np.eye(K.shape[0])


def gp_sample(kernel, mean, X, noise_var, rng, size=None):
    '''Draw(s) from N(m(X), K(X, X) + noise_var I), returned with shape (..., n, d).'''
    X = as_points(X)
    chol = cholesky_with_jitter(_noisy_gram(kernel, X, noise_var))
    flat = mvn_sample(mean(X).reshape(-1), chol, rng, size)
    return flat.reshape(flat.shape[:-1] + (X.shape[0], -1))


def gp_condition(kernel, mean, X_c, y_c, X_t, noise_var=0.0):
    '''Posterior of the latent outputs at X_t given noisy observations y_c at X_c.

    Parameters
    ----------
    kernel: Kernel
    mean: Mean
    X_c, X_t: np.array
        Context and target inputs
    y_c: np.array
        Context outputs, (n_c, d) or flat
    noise_var: float
        Observation noise variance added to the context gram only

    Returns
    -------
    posterior: GpPosterior
    '''
    X_c = as_points(X_c)
    X_t = as_points(X_t)
    if X_c.shape[0] == 0:
        raise ValueError("gp_condition needs a nonempty context")
    chol = cholesky_with_jitter(_noisy_gram(kernel, X_c, noise_var))
    K_tc = kernel.gram(X_t, X_c)
    K_tt = kernel.gram(X_t)
    residual = _flat(y_c) - mean(X_c).reshape(-1)
    post_mean = mean(X_t).reshape(-1) + K_tc @ chol.solve(residual)
    half = chol.solve_lower(K_tc)
    post_cov = K_tt - half @ half.T
    post_cov = 0.5 * (post_cov + post_cov.T)
    return GpPosterior(post_mean, post_cov, X_c.shape[0], X_t.shape[0])


def gp_loglik(kernel, mean, X, y, noise_var=0.0):
    '''log N(y; m(X), K(X, X) + noise_var I).'''
    X = as_points(X)
    chol = cholesky_with_jitter(_noisy_gram(kernel, X, noise_var))
    return float(mvn_logpdf(_flat(y), mean(X).reshape(-1), chol))


def gp_predictive_loglik(kernel, mean, X_c, y_c, X_t, y_t, noise_var=0.0, diagonal=False):
    '''Predictive log-density of noisy targets y_t given the context.

    With `diagonal` the posterior covariance is replaced by its diagonal (the "GP (Diag.)"
    baseline).
    '''
    posterior = gp_condition(kernel, mean, X_c, y_c, X_t, noise_var)
    if diagonal:
        posterior = posterior.diagonal()
    covariance = posterior.covariance + noise_var * np.eye(posterior.covariance.shape[0])
    return float(mvn_logpdf(_flat(y_t), posterior.mean, cholesky_with_jitter(covariance)))
