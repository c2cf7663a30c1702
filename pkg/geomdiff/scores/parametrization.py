import numpy as np

from ..numcore import CholeskyFactor, cholesky_with_jitter
from ..schedule import DiffusionSchedule, conditional_score
from ..networks.autodiff import Tensor

PARAMETRIZATIONS = ('none', 'precond_K', 'precond_ST', 'predict_Y0')
SIGMA_OFFSET = 1e-3


class Parametrization(object):
    '''How a network output F is turned into D = c_skip Y_t + c_out F and into the score.

    ===========  ======  =================  ========================  ============================
    kind         c_skip  c_out              loss                      K ∇log p_t
    ===========  ======  =================  ========================  ============================
    none         0       (σ + 1e-3)⁻¹       ‖σ Sᵀ D + z‖²             K D
    precond_K    0       (σ + 1e-3)⁻¹       ‖σ D + S z‖²              D
    precond_ST   0       (σ + 1e-3)⁻¹       ‖σ D + z‖²                S D
    predict_Y0   1       1                  ‖D − Y0‖²                 −σ⁻²(Y_t − e^{−B/2} D − (1 − e^{−B/2}) m)
    ===========  ======  =================  ========================  ============================

    σ is σ_{t|0} and S the Cholesky factor of the limiting gram K.
    '''

    def __init__(self, kind='precond_K', schedule=None):
        if kind not in PARAMETRIZATIONS:
            raise ValueError("unknown parametrization " + str(kind) + "; choose from " + str(PARAMETRIZATIONS))
        self.kind = kind
        self.schedule = DiffusionSchedule() if schedule is None else schedule

    def __repr__(self):
        return 'Parametrization(' + self.kind + ')'

    def c_skip(self, t):
        t = np.asarray(t, dtype=float)
        return np.ones_like(t) if self.kind == 'predict_Y0' else np.zeros_like(t)

    def c_out(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == 'predict_Y0':
            return np.ones_like(t)
        return 1.0 / (self.schedule.sigma(t) + SIGMA_OFFSET)


def _column(c, ndim):
    c = np.asarray(c, dtype=float)
    return c.reshape(c.shape + (1,) * (ndim - c.ndim))


def _row_matmul(D, M):
    '''Applies Mᵀ to each row vector of D, i.e. D @ M for batches of rows; M may be batched.'''
    shape = D.shape
    return (D.reshape(tuple(shape[:-1]) + (1, shape[-1])) @ M).reshape(shape)


def _as_field(Y):
    return Y if isinstance(Y, Tensor) else np.asarray(Y, dtype=float)


def _lower(S):
    return S.lower if isinstance(S, CholeskyFactor) else np.asarray(S, dtype=float)


def wrap_network(param, F_out, t, Y_t):
    '''D = c_skip(t) Y_t + c_out(t) F_out for flat fields of shape (..., N).'''
    Y_t = _as_field(Y_t)
    return _column(param.c_skip(t), Y_t.ndim) * Y_t + _column(param.c_out(t), Y_t.ndim) * F_out


def dsm_loss(param, D_out, Y0, z, sigma, S):
    '''Per-sample denoising loss of the parametrization's table form.

    Parameters
    ----------
    param: Parametrization
    D_out: np.array or Tensor
        Shape (..., N)
    Y0, z: np.array
        Clean data and the standard normal noise with Y_t = m_{t|0} + σ S z
    sigma: float or np.array
        σ_{t|0}, one per sample
    S: CholeskyFactor or np.array
        Cholesky factor of K, optionally batched (B, N, N)

    Returns
    -------
    loss: np.array or Tensor
        Shape (...)
    '''
    z = np.asarray(z, dtype=float)
    sigma = _column(sigma, z.ndim)
    lower = _lower(S)
    if param.kind == 'none':
        residual = sigma * _row_matmul(D_out, lower) + z
    elif param.kind == 'precond_K':
        residual = sigma * D_out + _row_matmul(z, np.swapaxes(lower, -1, -2))
    elif param.kind == 'precond_ST':
        residual = sigma * D_out + z
    else:
        residual = D_out - np.asarray(Y0, dtype=float)
    return (residual * residual).sum(axis=-1)


def definitional_dsm_loss(param, D_out, Y_t, Y0, t, schedule, K, mean):
    '''E‖D − target‖²_Λ with the conditional-score target of each parametrization.

    Λ is Σ_{t|0} for none, σ²I for precond_K and precond_ST and I for predict_Y0.
    '''
    K = np.asarray(K, dtype=float)
    chol = cholesky_with_jitter(K)
    g = conditional_score(schedule, t, Y_t, Y0, mean, chol)
    sigma2 = float(schedule.sigma(t)) ** 2
    D_out = np.asarray(D_out, dtype=float)
    if param.kind == 'none':
        diff = D_out - g
        return sigma2 * np.sum((diff @ K) * diff, axis=-1)
    if param.kind == 'precond_K':
        return sigma2 * np.sum((D_out - g @ K) ** 2, axis=-1)
    if param.kind == 'precond_ST':
        return sigma2 * np.sum((D_out - g @ chol.lower) ** 2, axis=-1)
    return np.sum((D_out - np.asarray(Y0, dtype=float)) ** 2, axis=-1)


def to_preconditioned_score(param, D_out, t, Y_t, schedule, K, mean=None, S=None):
    '''Converts D (array or Tensor, flat (..., N)) to the preconditioned score K ∇log p_t.'''
    if param.kind == 'none':
        return _row_matmul(D_out, np.asarray(K, dtype=float))
    if param.kind == 'precond_K':
        return D_out
    if param.kind == 'precond_ST':
        lower = _lower(S) if S is not None else cholesky_with_jitter(K).lower
        return _row_matmul(D_out, lower.T)
    if float(np.max(t)) <= 0:
        raise ValueError("predict_Y0 scores are singular at t=0")
    Y_t = _as_field(Y_t)
    decay = _column(schedule.decay(t), Y_t.ndim)
    sigma2 = _column(schedule.sigma(t) ** 2, Y_t.ndim)
    shift = Y_t if mean is None else Y_t - (1 - decay) * np.asarray(mean, dtype=float)
    return (decay * D_out - shift) / sigma2


def from_preconditioned_score(param, Ks, t, Y_t, schedule, K, mean=None, S=None):
    '''Inverse of `to_preconditioned_score` on arrays: the D that represents a given K ∇log p_t.'''
    Ks = np.asarray(Ks, dtype=float)
    if param.kind == 'none':
        return cholesky_with_jitter(K).solve(Ks)
    if param.kind == 'precond_K':
        return Ks
    if param.kind == 'precond_ST':
        chol = CholeskyFactor(_lower(S)) if S is not None else cholesky_with_jitter(K)
        return chol.solve_lower(Ks)
    Y_t = np.asarray(Y_t, dtype=float)
    decay = schedule.decay(t)
    shift = Y_t if mean is None else Y_t - (1 - decay) * np.asarray(mean, dtype=float)
    return (shift + schedule.sigma(t) ** 2 * Ks) / decay
