from abc import ABC, abstractmethod
from dataclasses import dataclass, asdict
import logging
import numpy as np

from .exceptions import NumericalError
from .kernels import as_points
from .numcore import RngStream, cholesky_with_jitter
from .io_tools import write_csv

logger = logging.getLogger(__name__)


@dataclass
class SdeRunConfig:
    '''Discretisation of a reverse-time run. `eps_clip` None means the schedule's own floor.'''
    steps: int = 1000
    eps_clip: float = None
    seed: int = 0
    store_trajectory: bool = False
    integrator: str = 'euler_maruyama'

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be at least 1, got " + str(self.steps))
        if self.eps_clip is not None and self.eps_clip <= 0:
            raise ValueError("eps_clip must be positive")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


class ReverseIntegrator(ABC):
    '''One reverse-time step of dȲ = β(½(Ȳ − m) + K∇log p) ds + √β K^{1/2} dB from t to t_next < t.'''
    integrator_name = None

    def __init__(self, schedule):
        self.schedule = schedule

    @abstractmethod
    def update(self, Y, t, t_next, Ks, mean, sqrt_gram, rng):
        pass


class EulerMaruyamaIntegrator(ReverseIntegrator):
    integrator_name = 'euler_maruyama'

    def update(self, Y, t, t_next, Ks, mean, sqrt_gram, rng):
        dt = t - t_next
        b = float(self.schedule.beta(t))
        noise = rng.normal(size=Y.shape) @ sqrt_gram.T
        return Y + b * (0.5 * (Y - mean) + Ks) * dt + np.sqrt(b * dt) * noise


class ExponentialIntegrator(ReverseIntegrator):
    '''Integrates the linear OU part exactly and holds the score fixed over the step.'''
    integrator_name = 'exponential'

    def update(self, Y, t, t_next, Ks, mean, sqrt_gram, rng):
        growth, drift_scale, noise_scale = exponential_coefficients(
            float(self.schedule.B_integral(t) - self.schedule.B_integral(t_next)))
        noise = rng.normal(size=Y.shape) @ sqrt_gram.T
        return mean + growth * (Y - mean) + drift_scale * Ks + noise_scale * noise


integrator_full_list = [
    EulerMaruyamaIntegrator,
    ExponentialIntegrator,
]

integrator_dict = {integrator_class.integrator_name: integrator_class for integrator_class in integrator_full_list}


def exponential_coefficients(delta_B):
    '''(e^{ΔB/2}, 2(e^{ΔB/2} − 1), (e^{ΔB} − 1)^{1/2}) for a reverse step spanning ΔB of B(t).'''
    return np.exp(0.5 * delta_B), 2 * np.expm1(0.5 * delta_B), np.sqrt(np.expm1(delta_B))


def forward_coefficients(delta_B):
    '''(e^{−ΔB/2}, (1 − e^{−ΔB})^{1/2}) for the exact forward OU transition over ΔB.'''
    return np.exp(-0.5 * delta_B), np.sqrt(-np.expm1(-delta_B))


def get_integrator(name, schedule):
    if name not in integrator_dict:
        raise ValueError("unknown integrator " + str(name) + "; choose from " + str(list(integrator_dict)))
    return integrator_dict[name](schedule)


def _prior(kernel, mean, X, sqrt_gram=None):
    X = as_points(X)
    m = mean(X).reshape(-1)
    if sqrt_gram is None:
        sqrt_gram = cholesky_with_jitter(kernel.gram(X)).lower
    return X, m, np.asarray(sqrt_gram, dtype=float)


def _evaluate(score, t, X, Y):
    '''Score on flat states (S, N), with the model called on (S, n, d).'''
    return score(t, X, Y.reshape(Y.shape[0], X.shape[0], -1)).reshape(Y.shape)


def _check_state(Y, t, what):
    if not np.all(np.isfinite(Y)):
        raise NumericalError(what + " produced non-finite values at t=" + str(t))


def _finish(Y, X, num_samples):
    out = Y.reshape(Y.shape[0], X.shape[0], -1)
    return out[0] if num_samples is None else out


def reverse_sde_sample(score, kernel, mean, X, config=None, rng=None, num_samples=None, integrator=None,
                       sqrt_gram=None, Y_init=None):
    '''Generates function values at X by integrating the reverse SDE from T down to ε_clip.

    Parameters
    ----------
    score: ScoreModel
        Preconditioned score K∇log p_t
    kernel, mean: Kernel, Mean
        Limiting process GP(m, k)
    X: np.array
        Inputs (n, dx)
    config: SdeRunConfig
    rng: RngStream
        Defaults to a stream seeded with `config.seed`
    num_samples: int
        Number of independent draws; None returns a single (n, d) draw
    integrator: str
        'euler_maruyama' or 'exponential'; defaults to `config.integrator`
    sqrt_gram: np.array
        Square root M of K(X, X) used for both the initial draw and the noise; defaults to the
        Cholesky factor
    Y_init: np.array
        Initial state at T instead of a draw from N(m, K)

    Returns
    -------
    samples: np.array
        (n, d) or (num_samples, n, d)
    times, trajectory: np.array
        Only with `config.store_trajectory`; trajectory has shape (steps + 1, S, n, d)
    '''
    config = SdeRunConfig() if config is None else config
    rng = RngStream(config.seed) if rng is None else rng
    X, m, M = _prior(kernel, mean, X, sqrt_gram)
    stepper = get_integrator(config.integrator if integrator is None else integrator, score.schedule)
    times = score.schedule.time_grid(config.steps, config.eps_clip)
    S = 1 if num_samples is None else int(num_samples)
    if Y_init is None:
        Y = m + rng.normal(size=(S, len(m))) @ M.T
    else:
        Y = np.array(Y_init, dtype=float).reshape(S, -1)
    path = [Y.copy()] if config.store_trajectory else None
    for k in range(config.steps):
        t, t_next = times[k], times[k + 1]
        Y = stepper.update(Y, t, t_next, _evaluate(score, t, X, Y), m, M, rng)
        _check_state(Y, t_next, "reverse SDE")
        if path is not None:
            path.append(Y.copy())
    logger.debug("reverse SDE: %d steps, %d samples, %d points", config.steps, S, X.shape[0])
    samples = _finish(Y, X, num_samples)
    if path is None:
        return samples
    return samples, times, np.stack(path).reshape((len(times), S, X.shape[0], -1))


def probability_flow_drift(score, t, X, Y, m):
    '''½ β(t) (m − Y − K∇log p_t(Y)) on flat states (S, N).'''
    return 0.5 * float(score.schedule.beta(t)) * (m - Y - _evaluate(score, t, X, Y))


def probability_flow_step(score, X, Y, m, t, t_next):
    '''Heun step of the probability-flow ODE from t to t_next (either direction).'''
    h = t_next - t
    f0 = probability_flow_drift(score, t, X, Y, m)
    predictor = Y + h * f0
    return Y + 0.5 * h * (f0 + probability_flow_drift(score, t_next, X, predictor, m))


def probability_flow_sample(score, kernel, mean, X, config=None, rng=None, num_samples=None, Y_init=None):
    '''Deterministic generation by integrating the probability-flow ODE from T to ε_clip with Heun.

    The only randomness is the initial draw from N(m, K), skipped when `Y_init` is given.
    '''
    config = SdeRunConfig() if config is None else config
    X, m, M = _prior(kernel, mean, X)
    S = 1 if num_samples is None else int(num_samples)
    if Y_init is None:
        rng = RngStream(config.seed) if rng is None else rng
        Y = m + rng.normal(size=(S, len(m))) @ M.T
    else:
        Y = np.array(Y_init, dtype=float).reshape(S, -1)
    times = score.schedule.time_grid(config.steps, config.eps_clip)
    for k in range(config.steps):
        Y = probability_flow_step(score, X, Y, m, times[k], times[k + 1])
        _check_state(Y, times[k + 1], "probability-flow ODE")
    return _finish(Y, X, num_samples)


def langevin_steps(score, X, K_chol, Y_init, t, n_steps, step, rng):
    '''Langevin dynamics dY = ½ K∇log p_t ds + K^{1/2} dB at fixed t.

    Each step is Y ← Y + (γ/2) K∇log p_t(Y) + √γ K^{1/2} z. Y has shape (..., n, d).
    '''
    if step <= 0:
        raise ValueError("Langevin step size must be positive")
    Y = np.array(Y_init, dtype=float)
    shape = Y.shape
    for _ in range(int(n_steps)):
        Ks = score(t, X, Y)
        Y = Y + 0.5 * step * Ks + np.sqrt(step) * K_chol.matvec(rng.normal(size=shape[:-2] + (K_chol.dim,))
                                                               ).reshape(shape)
        _check_state(Y, t, "Langevin dynamics")
    return Y


def write_trajectory_csv(path, times, trajectory):
    '''Writes a trajectory (len(times), S, n, d) as rows (t, sample, point, dim, value).'''
    trajectory = np.asarray(trajectory, dtype=float)
    if trajectory.ndim == 3:
        trajectory = trajectory[:, None]

    def rows():
        for k, t in enumerate(times):
            for s in range(trajectory.shape[1]):
                for i in range(trajectory.shape[2]):
                    for a in range(trajectory.shape[3]):
                        yield [float(t), s, i, a, trajectory[k, s, i, a]]

    return write_csv(path, ['t', 'sample', 'point', 'dim', 'value'], rows())
