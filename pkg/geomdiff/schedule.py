from dataclasses import dataclass, asdict
import numpy as np

from .numcore import cholesky_with_jitter

TIME_TOLERANCE = 1e-12


@dataclass
class DiffusionSchedule:
    '''Linear time scale β(t) = β_min + (β_max − β_min) t / T on [0, T].

    `eps_clip` is the floor of every reverse-time integration.
    '''
    kind: str = 'linear'
    beta_min: float = 1e-4
    beta_max: float = 15.0
    T: float = 1.0
    eps_clip: float = 5e-4

    def __post_init__(self):
        if self.kind != 'linear':
            raise ValueError("only the linear schedule is available, got " + str(self.kind))
        if self.beta_min <= 0 or self.beta_max < self.beta_min:
            raise ValueError("need 0 < beta_min <= beta_max")
        if self.T <= 0 or not 0 < self.eps_clip < self.T:
            raise ValueError("need T > 0 and eps_clip in (0, T)")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})

    def _check_time(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < -TIME_TOLERANCE) or np.any(t > self.T + TIME_TOLERANCE):
            raise ValueError("time outside [0, T]: " + str(t))
        return np.clip(t, 0.0, self.T)

    def beta(self, t):
        t = self._check_time(t)
        return self.beta_min + (self.beta_max - self.beta_min) * t / self.T

    def B_integral(self, t):
        t = self._check_time(t)
        return self.beta_min * t + (self.beta_max - self.beta_min) * t ** 2 / (2 * self.T)

    def decay(self, t):
        '''e^{−B(t)/2}'''
        return np.exp(-0.5 * self.B_integral(t))

    def sigma(self, t):
        '''σ_{t|0} = (1 − e^{−B(t)})^{1/2}'''
        return np.sqrt(-np.expm1(-self.B_integral(t)))

    def time_grid(self, steps, eps_clip=None):
        '''Uniform grid from T down to eps_clip with `steps` intervals.'''
        if steps < 1:
            raise ValueError("steps must be at least 1")
        eps_clip = self.eps_clip if eps_clip is None else eps_clip
        if not 0 < eps_clip < self.T:
            raise ValueError("eps_clip must lie in (0, T)")
        return np.linspace(self.T, eps_clip, int(steps) + 1)


def beta(schedule, t):
    return schedule.beta(t)


def B_integral(schedule, t):
    return schedule.B_integral(t)


@dataclass
class TransitionMoments:
    mean: np.ndarray
    covariance: np.ndarray
    sigma: float
    decay: float


def transition_mean(schedule, t, Y0, mean):
    decay = schedule.decay(t)
    return decay * np.asarray(Y0, dtype=float) + (1 - decay) * np.asarray(mean, dtype=float)


def transition_moments(schedule, t, Y0, mean, K):
    '''Moments of Y_t given Y_0: mean e^{−B/2} Y0 + (1 − e^{−B/2}) m and covariance (1 − e^{−B}) K.'''
    sigma = float(schedule.sigma(t))
    return TransitionMoments(transition_mean(schedule, t, Y0, mean), sigma ** 2 * np.asarray(K, dtype=float),
                             sigma, float(schedule.decay(t)))


def conditional_score(schedule, t, Y_t, Y0, mean, K_chol):
    '''∇ log p_{t|0}(Y_t | Y0) = −Σ_{t|0}⁻¹ (Y_t − m_{t|0}), using Σ_{t|0} = σ² K.'''
    if float(t) <= 0:
        raise ValueError("the conditional score is singular at t=0")
    residual = np.asarray(Y_t, dtype=float) - transition_mean(schedule, t, Y0, mean)
    return -K_chol.solve(residual) / float(schedule.sigma(t)) ** 2


def marginal_moments(schedule, t, m0, Sigma0, m, K):
    '''Marginal moments of Y_t when Y_0 ~ N(m0, Σ0): m_t and Σ_t = K + e^{−B}(Σ0 − K).'''
    K = np.asarray(K, dtype=float)
    m_t = transition_mean(schedule, t, m0, m)
    Sigma_t = K + np.exp(-schedule.B_integral(t)) * (np.asarray(Sigma0, dtype=float) - K)
    return m_t, 0.5 * (Sigma_t + Sigma_t.T)


def exact_marginal_score(schedule, t, Y_t, m0, Sigma0, m, K):
    '''Preconditioned score K ∇ log p_t(Y_t) for Gaussian data N(m0, Σ0); batched over leading axes.'''
    m_t, Sigma_t = marginal_moments(schedule, t, m0, Sigma0, m, K)
    chol = cholesky_with_jitter(Sigma_t)
    return -chol.solve(np.asarray(Y_t, dtype=float) - m_t) @ np.asarray(K, dtype=float)


def simulate_forward_sde(schedule, Y0, mean, K_chol, rng, steps=None, t_end=None, times=None):
    '''Euler–Maruyama simulation of dY = ½(m − Y) β dt + √β K^{1/2} dB.

    Either pass an ascending `times` grid starting at 0, or `steps` and `t_end` (default T).

    Returns
    -------
    times: np.array
    path: np.array
        Shape (len(times),) + Y0.shape
    '''
    if times is None:
        if steps is None or steps < 1:
            raise ValueError("steps must be at least 1")
        t_end = schedule.T if t_end is None else t_end
        times = np.linspace(0.0, t_end, int(steps) + 1)
    times = np.asarray(times, dtype=float)
    Y = np.array(Y0, dtype=float)
    mean = np.asarray(mean, dtype=float)
    path = np.empty((len(times),) + Y.shape)
    path[0] = Y
    for k in range(len(times) - 1):
        dt = times[k + 1] - times[k]
        b = float(schedule.beta(times[k]))
        noise = K_chol.matvec(rng.normal(size=Y.shape))
        Y = Y + 0.5 * (mean - Y) * b * dt + np.sqrt(b * dt) * noise
        path[k + 1] = Y
    return times, path
