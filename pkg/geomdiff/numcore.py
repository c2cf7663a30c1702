import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import NotPositiveDefiniteError

LOG_2PI = np.log(2 * np.pi)
JITTER_LADDER_BASE = 1e-8


class RngStream(object):
    '''Seeded stream of random draws.

    Identical seeds give identical draw sequences. A stream is owned by a single caller;
    use `split` to hand independent streams to parallel workers.

    Parameters
    ----------
    seed: int
        64-bit seed
    seed_sequence: np.random.SeedSequence
        Used by `split`; overrides `seed` when given
    '''

    def __init__(self, seed=0, seed_sequence=None):
        if seed_sequence is None:
            seed_sequence = np.random.SeedSequence(int(seed))
        self.seed = seed_sequence.entropy
        self._seed_sequence = seed_sequence
        self._generator = np.random.Generator(np.random.PCG64(seed_sequence))

    @property
    def generator(self):
        return self._generator

    def split(self, n):
        return [RngStream(seed_sequence=child) for child in self._seed_sequence.spawn(n)]

    def normal(self, size=None):
        return self._generator.standard_normal(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._generator.uniform(low, high, size)

    def integers(self, low, high=None, size=None):
        return self._generator.integers(low, high, size)

    def rademacher(self, size=None):
        return self._generator.integers(0, 2, size) * 2.0 - 1.0

    def permutation(self, n):
        return self._generator.permutation(n)


class CholeskyFactor(object):
    '''Lower-triangular factor L with L Lᵀ = A + jitter_used I.

    Vectors are stored along the last axis, so every helper accepts batches of shape (..., N).
    '''

    def __init__(self, lower, jitter_used=0.0):
        self.lower = np.asarray(lower, dtype=float)
        self.jitter_used = float(jitter_used)

    @property
    def dim(self):
        return self.lower.shape[0]

    def matrix(self):
        return self.lower @ self.lower.T

    def _check(self, b):
        b = np.asarray(b, dtype=float)
        if b.shape[-1] != self.dim:
            raise ValueError("dimension mismatch: factor of size " + str(self.dim) +
                             " applied to vectors of size " + str(b.shape[-1]))
        return b

    def _triangular(self, b, trans):
        b = self._check(b)
        flat = b.reshape(-1, self.dim).T
        out = solve_triangular(self.lower, flat, lower=True, trans=trans, check_finite=False)
        return out.T.reshape(b.shape)

    def matvec(self, b):
        '''L b'''
        b = self._check(b)
        return b @ self.lower.T

    def solve_lower(self, b):
        '''L⁻¹ b'''
        return self._triangular(b, 0)

    def solve_upper(self, b):
        '''L⁻ᵀ b'''
        return self._triangular(b, 1)

    def solve(self, b):
        '''(L Lᵀ)⁻¹ b'''
        return self.solve_upper(self.solve_lower(b))

    def logdet(self):
        return 2 * np.sum(np.log(np.diag(self.lower)))


def cholesky_with_jitter(A, base_jitter=0.0, max_retries=6):
    '''Cholesky factorisation with a geometric jitter ladder.

    The first attempt adds `base_jitter` times the mean diagonal. Each retry multiplies the
    jitter by 10, starting from 1e-8 times the mean diagonal when `base_jitter` is 0.

    Parameters
    ----------
    A: np.array
        Square matrix, symmetrised internally
    base_jitter: float
        Relative jitter of the first attempt
    max_retries: int
        Number of escalations before giving up

    Returns
    -------
    chol: CholeskyFactor
    '''
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("cholesky_with_jitter needs a square matrix, got shape " + str(A.shape))
    A = 0.5 * (A + A.T)
    scale = np.mean(np.diag(A)) if A.shape[0] > 0 else 1.0
    if not scale > 0:
        scale = 1.0
    relative = float(base_jitter)
    for attempt in range(max_retries + 1):
        jitter = relative * scale
        try:
            lower = np.linalg.cholesky(A + jitter * np.eye(A.shape[0]))
        except np.linalg.LinAlgError:
            relative = max(relative, JITTER_LADDER_BASE / 10) * 10
            continue
        return CholeskyFactor(lower, jitter)
    raise NotPositiveDefiniteError("matrix is not positive definite after " + str(max_retries) +
                                   " jitter escalations (last relative jitter " + str(relative) + ")")


def mvn_sample(mean, chol, rng, size=None):
    '''Draws mean + L z with z standard normal; `size` adds leading sample axes.'''
    mean = np.asarray(mean, dtype=float)
    if mean.shape[-1] != chol.dim:
        raise ValueError("dimension mismatch between mean and Cholesky factor")
    shape = (chol.dim,) if size is None else tuple(np.atleast_1d(size)) + (chol.dim,)
    z = rng.normal(size=shape)
    return mean + chol.matvec(z)


def mvn_logpdf(y, mean, chol):
    '''Gaussian log-density through triangular solves; batched over leading axes of y.'''
    y = np.asarray(y, dtype=float)
    mean = np.asarray(mean, dtype=float)
    if y.shape[-1] != chol.dim or mean.shape[-1] != chol.dim:
        raise ValueError("dimension mismatch in mvn_logpdf")
    alpha = chol.solve_lower(y - mean)
    return -0.5 * np.sum(alpha ** 2, axis=-1) - 0.5 * chol.logdet() - 0.5 * chol.dim * LOG_2PI


def gaussian_kl(mean_p, cov_p, mean_q, cov_q):
    '''KL(N(mean_p, cov_p) || N(mean_q, cov_q)) in nats.'''
    chol_q = cholesky_with_jitter(cov_q)
    chol_p = cholesky_with_jitter(cov_p)
    k = chol_q.dim
    trace = np.trace(chol_q.solve(np.asarray(cov_p, dtype=float)))
    diff = np.asarray(mean_q, dtype=float) - np.asarray(mean_p, dtype=float)
    maha = np.sum(chol_q.solve_lower(diff) ** 2)
    return 0.5 * (trace + maha - k + chol_q.logdet() - chol_p.logdet())


def fit_gaussian(samples):
    '''Empirical mean and covariance of samples of shape (S, N).'''
    samples = np.asarray(samples, dtype=float).reshape(len(samples), -1)
    return samples.mean(axis=0), np.cov(samples, rowvar=False).reshape(samples.shape[1], samples.shape[1])
