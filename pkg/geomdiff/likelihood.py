from dataclasses import dataclass, asdict
import logging
import numpy as np
from scipy.special import logsumexp

from .exceptions import NumericalError
from .gp import gp_condition
from .kernels import as_points
from .numcore import RngStream, cholesky_with_jitter, mvn_logpdf
from .samplers import SdeRunConfig

logger = logging.getLogger(__name__)

DIVERGENCE_KINDS = ('exact_autodiff', 'hutchinson')
ODE_STEPS = 100


@dataclass
class DivergenceMode:
    '''How div K∇log p_t is computed: exactly from one VJP per output coordinate, or by the
    Hutchinson estimator with `probes` Rademacher probes held fixed for a whole solve.'''
    kind: str = 'exact_autodiff'
    probes: int = 8

    def __post_init__(self):
        if self.kind not in DIVERGENCE_KINDS:
            raise ValueError("unknown divergence mode " + str(self.kind) + "; choose from " + str(DIVERGENCE_KINDS))
        if self.probes < 1:
            raise ValueError("probe count must be at least 1")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


def _probes(mode, Y, rng):
    '''Probe vectors of shape (P,) + Y.shape.'''
    if mode.kind == 'exact_autodiff':
        N = Y.shape[-2] * Y.shape[-1]
        eye = np.eye(N).reshape((N,) + (1,) * (Y.ndim - 2) + Y.shape[-2:])
        return np.broadcast_to(eye, (N,) + Y.shape)
    return rng.rademacher(size=(mode.probes,) + Y.shape)


def _score_and_divergence(score, t, X, Y, probes):
    Ks, grads = score.vjp(t, X, Y, probes)
    estimates = np.sum(probes * grads, axis=(-2, -1))
    return Ks, estimates


def divergence(score, t, X, Y, mode=None, rng=None):
    '''Divergence of Y ↦ K∇log p_t(Y), exact or by Hutchinson's estimator.

    Parameters
    ----------
    score: ScoreModel
    t: float
    X: np.array
        Inputs (n, dx)
    Y: np.array
        States (..., n, d)
    mode: DivergenceMode
    rng: RngStream
        Source of Rademacher probes

    Returns
    -------
    div: float or np.array
        One value per state
    '''
    mode = DivergenceMode() if mode is None else mode
    rng = RngStream(0) if rng is None else rng
    Y = np.asarray(Y, dtype=float)
    probes = _probes(mode, Y, rng)
    _, estimates = _score_and_divergence(score, t, X, Y, probes)
    div = estimates.sum(axis=0) if mode.kind == 'exact_autodiff' else estimates.mean(axis=0)
    return float(div) if np.ndim(div) == 0 else div


def _drift_and_divergence(score, t, X, Y, m, probes, mode):
    '''Probability-flow drift ½β(m − Y − Ks) and its divergence ½β(−N − div Ks).'''
    Ks, estimates = _score_and_divergence(score, t, X, Y, probes)
    div_Ks = estimates.sum(axis=0) if mode.kind == 'exact_autodiff' else estimates.mean(axis=0)
    half_beta = 0.5 * float(score.schedule.beta(t))
    N = Y.shape[-2] * Y.shape[-1]
    return half_beta * (m - Y - Ks), half_beta * (-N - div_Ks)


def log_likelihood(score, kernel, mean, X, y, ode_config=None, div_mode=None, rng=None):
    '''log p(y | X) through the probability-flow ODE.

    The state and the accumulated divergence are integrated jointly from ε_clip to T with Heun's
    method, then the log-density of the terminal state under N(m, K) is added.

    Parameters
    ----------
    score: ScoreModel
    kernel, mean: Kernel, Mean
        Limiting process
    X: np.array
        Inputs (n, dx)
    y: np.array
        Outputs (n, d), or a batch (B, n, d) evaluated at the same inputs
    ode_config: SdeRunConfig
        Step count (default 100) and ε_clip
    div_mode: DivergenceMode
    rng: RngStream
        Source of Hutchinson probes

    Returns
    -------
    loglik: float or np.array
    '''
    ode_config = SdeRunConfig(steps=ODE_STEPS) if ode_config is None else ode_config
    div_mode = DivergenceMode() if div_mode is None else div_mode
    rng = RngStream(ode_config.seed) if rng is None else rng
    if not getattr(score, 'is_smooth', True):
        logger.warning("the score is not smooth in y; ODE likelihoods may be unreliable")
    X = as_points(X)
    Y = np.array(y, dtype=float)
    single = Y.ndim == 2
    if single:
        Y = Y[None]
    if Y.shape[-2] != X.shape[0]:
        raise ValueError("y must have one row per input point")
    if not np.all(np.isfinite(Y)):
        raise ValueError("y must be finite")
    m = mean(X)
    probes = _probes(div_mode, Y, rng)
    times = score.schedule.time_grid(ode_config.steps, ode_config.eps_clip)[::-1]
    delta = np.zeros(Y.shape[0])
    for k in range(len(times) - 1):
        t, t_next = times[k], times[k + 1]
        h = t_next - t
        f0, d0 = _drift_and_divergence(score, t, X, Y, m, probes, div_mode)
        f1, d1 = _drift_and_divergence(score, t_next, X, Y + h * f0, m, probes, div_mode)
        Y = Y + 0.5 * h * (f0 + f1)
        delta = delta + 0.5 * h * (d0 + d1)
        if not (np.all(np.isfinite(Y)) and np.all(np.isfinite(delta))):
            raise NumericalError("likelihood ODE produced non-finite values at t=" + str(t_next))
    prior = mvn_logpdf(Y.reshape(Y.shape[0], -1), m.reshape(-1), cholesky_with_jitter(kernel.gram(X)))
    loglik = prior + delta
    return float(loglik[0]) if single else loglik


def conditional_log_likelihood(score, kernel, mean, X_c, y_c, X_t, y_t, ode_config=None, div_mode=None, rng=None):
    '''log p(y* | X*, C) = log p(y_c, y* | X_c, X*) − log p(y_c | X_c), from two ODE solves.'''
    X_t = np.asarray(X_t, dtype=float)
    if X_t.size == 0:
        return 0.0
    X_c = as_points(X_c)
    X_t = as_points(X_t)
    y_c = np.asarray(y_c, dtype=float).reshape(X_c.shape[0], -1)
    y_t = np.asarray(y_t, dtype=float).reshape(X_t.shape[0], -1)
    joint = log_likelihood(score, kernel, mean, np.concatenate([X_c, X_t]), np.concatenate([y_c, y_t]),
                           ode_config, div_mode, rng)
    context = log_likelihood(score, kernel, mean, X_c, y_c, ode_config, div_mode, rng)
    return joint - context


def consistency_gap(score, kernel, mean, X_a, y_a, X_b, proposal=None, num_proposals=64, ode_config=None,
                    div_mode=None, rng=None):
    '''|log p(y_A) − log ∫ p(y_A, y_B) dy_B| for a model evaluated on two nested input sets.

    The integral is estimated by importance sampling with draws of y_B from `proposal`
    (default: posterior of the limiting GP given (X_A, y_A)).

    Returns
    -------
    gap: float
        Absolute difference in nats
    '''
    rng = RngStream(0) if rng is None else rng
    X_a = as_points(X_a)
    X_b = as_points(X_b)
    y_a = np.asarray(y_a, dtype=float).reshape(X_a.shape[0], -1)
    if proposal is None:
        proposal = gp_condition(kernel, mean, X_a, y_a, X_b)
    draws = proposal.sample(rng, size=num_proposals)
    y_b = draws.reshape(num_proposals, X_b.shape[0], -1)
    joint_y = np.concatenate([np.broadcast_to(y_a, (num_proposals,) + y_a.shape), y_b], axis=1)
    joint = log_likelihood(score, kernel, mean, np.concatenate([X_a, X_b]), joint_y, ode_config, div_mode, rng)
    log_weights = joint - proposal.logpdf(draws)
    integrated = float(logsumexp(log_weights) - np.log(num_proposals))
    marginal = log_likelihood(score, kernel, mean, X_a, y_a, ode_config, div_mode, rng)
    logger.debug("consistency: marginal %.4f, integrated joint %.4f", marginal, integrated)
    return abs(marginal - integrated)
