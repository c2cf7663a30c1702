from concurrent.futures import ThreadPoolExecutor
import copy
from dataclasses import dataclass, asdict
import logging
import math
import numpy as np

from .exceptions import AcceptanceError, NumericalError
from .kernels import as_points
from .numcore import RngStream, cholesky_with_jitter, fit_gaussian, gaussian_kl
from .schedule import simulate_forward_sde, transition_mean
from .samplers import EulerMaruyamaIntegrator, exponential_coefficients, forward_coefficients

logger = logging.getLogger(__name__)

SCHEMES = ('resample_every_inner', 'resample_every_outer', 'sde_path_noise', 'no_noise')


@dataclass
class ConditioningTask:
    '''Context pairs, target inputs and the sampler budget of one conditional draw.

    `langevin_step_size` None uses the reverse step size β(t) Δt of the outer grid. Langevin-corrected
    sampling takes `inner_steps` ≥ 1; 0 is accepted only to express the replacement baseline, which
    skips the correction entirely.
    '''
    context_x: np.ndarray
    context_y: np.ndarray
    target_x: np.ndarray
    scheme: str = 'resample_every_inner'
    outer_steps: int = 500
    inner_steps: int = 5
    terminal_langevin_steps: int = 0
    langevin_step_size: float = None
    eps_clip: float = None
    seed: int = 0

    def __post_init__(self):
        self.context_x = as_points(self.context_x)
        self.target_x = as_points(self.target_x)
        self.context_y = np.asarray(self.context_y, dtype=float).reshape(self.context_x.shape[0], -1)
        if self.target_x.shape[0] == 0:
            raise ValueError("conditional sampling needs at least one target input")
        if self.context_x.shape[0] == 0:
            raise ValueError("conditional sampling needs at least one context point")
        if self.context_x.shape[1] != self.target_x.shape[1]:
            raise ValueError("context and target inputs differ in dimension")
        if self.scheme not in SCHEMES:
            raise ValueError("unknown noising scheme " + str(self.scheme) + "; choose from " + str(SCHEMES))
        if self.outer_steps < 1 or self.inner_steps < 0 or self.terminal_langevin_steps < 0:
            raise ValueError("outer_steps must be positive, inner and terminal steps non-negative")
        if self.langevin_step_size is not None and self.langevin_step_size <= 0:
            raise ValueError("langevin_step_size must be positive")

    @property
    def joint_x(self):
        return np.concatenate([self.context_x, self.target_x], axis=0)

    def replace(self, **changes):
        d = dict(self.__dict__)
        d.update(changes)
        return ConditioningTask(**d)

    def to_dict(self):
        d = asdict(self)
        for key in ('context_x', 'context_y', 'target_x'):
            d[key] = np.asarray(d[key]).tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


@dataclass
class ConditioningStats:
    '''Call counts of one conditional sampling run.

    `context_noise_draws` counts closed-form draws of the noised context. `simulated_noise_cost`
    is the number of forward-SDE steps the same draws would need if the noise had to be simulated
    on a grid of the run's resolution.
    '''
    scheme: str
    score_evaluations: int = 0
    context_noise_draws: int = 0
    simulated_noise_cost: int = 0


@dataclass
class SchemeCost:
    scheme: str
    closed_form_noise_cost: str
    simulated_noise_cost: str


def scheme_costs():
    '''Complexity of context noising for N outer and I inner steps.'''
    return {
        'resample_every_inner': SchemeCost('resample_every_inner', 'O(NI)', 'O(N^2 I^2)'),
        'resample_every_outer': SchemeCost('resample_every_outer', 'O(N)', 'O(N^2)'),
        'sde_path_noise': SchemeCost('sde_path_noise', 'O(N)', 'O(N)'),
        'no_noise': SchemeCost('no_noise', '-', '-'),
    }


class ContextNoiser(object):
    '''Produces the noised context y^c_t of a scheme and keeps the stats of every draw.'''

    def __init__(self, task, schedule, kernel, mean, times, rng, num_samples, stats):
        self.task = task
        self.schedule = schedule
        self.rng = rng
        self.stats = stats
        self.num_samples = num_samples
        self.y0 = task.context_y.reshape(-1)
        self.m = mean(task.context_x).reshape(-1)
        self.chol = cholesky_with_jitter(kernel.gram(task.context_x))
        inner = task.inner_steps if task.scheme == 'resample_every_inner' else 0
        self.resolution = task.outer_steps * (inner + 1)
        self._held = {}
        self._path = None
        if task.scheme == 'sde_path_noise':
            ascending = np.concatenate([[0.0], times[::-1]])
            y0 = np.broadcast_to(self.y0, (num_samples, len(self.y0)))
            _, path = simulate_forward_sde(schedule, y0, self.m, self.chol, rng, times=ascending)
            self._path = {float(t): path[k] for k, t in enumerate(ascending)}
            self.stats.context_noise_draws += 1
            self.stats.simulated_noise_cost += task.outer_steps

    def _draw(self, t):
        self.stats.context_noise_draws += 1
        self.stats.simulated_noise_cost += int(math.ceil(t / self.schedule.T * self.resolution))
        z = self.rng.normal(size=(self.num_samples, len(self.y0)))
        mean_t = transition_mean(self.schedule, t, self.y0, self.m)
        return mean_t + float(self.schedule.sigma(t)) * self.chol.matvec(z)

    def __call__(self, t):
        scheme = self.task.scheme
        if scheme == 'no_noise':
            return np.broadcast_to(self.y0, (self.num_samples, len(self.y0)))
        if scheme == 'sde_path_noise':
            return self._path[float(t)]
        if scheme == 'resample_every_outer':
            if float(t) not in self._held:
                self._held = {float(t): self._draw(t)}
            return self._held[float(t)]
        return self._draw(t)


class _JointState(object):
    '''Joint flat vector [y^c, y^*] with updates that only ever return the target slots.'''

    def __init__(self, score, kernel, mean, task):
        self.score = score
        self.X = task.joint_x
        self.m = mean(self.X).reshape(-1)
        self.chol = cholesky_with_jitter(kernel.gram(self.X))
        self.split = task.context_y.size
        self.debug = logger.isEnabledFor(logging.DEBUG)
        self._snapshot = None

    def assemble(self, context, targets):
        if self.debug:
            self._snapshot = np.array(context, copy=True)
        return np.concatenate([context, targets], axis=1)

    def score_at(self, t, joint):
        Ks = self.score(t, self.X, joint.reshape(joint.shape[0], self.X.shape[0], -1))
        return Ks.reshape(joint.shape)

    def targets_of(self, updated, context):
        if self.debug and not np.array_equal(context, self._snapshot):
            raise AssertionError("context slots were modified by an update")
        out = updated[:, self.split:]
        if not np.all(np.isfinite(out)):
            raise NumericalError("conditional sampler produced non-finite values")
        return out


def _langevin_update(state, t, context, targets, step, rng):
    joint = state.assemble(context, targets)
    noise = state.chol.matvec(rng.normal(size=joint.shape))
    updated = joint + 0.5 * step * state.score_at(t, joint) + np.sqrt(step) * noise
    return state.targets_of(updated, context)


def _prepare(score, kernel, mean, schedule, task, rng, num_samples):
    rng = RngStream(task.seed) if rng is None else rng
    S = 1 if num_samples is None else int(num_samples)
    times = schedule.time_grid(task.outer_steps, task.eps_clip)
    state = _JointState(score, kernel, mean, task)
    m_t = mean(task.target_x).reshape(-1)
    chol_t = cholesky_with_jitter(kernel.gram(task.target_x))
    targets = m_t + rng.normal(size=(S, len(m_t))) @ chol_t.lower.T
    return rng, S, times, state, targets, chol_t


def _finish(targets, task, num_samples):
    out = targets.reshape(targets.shape[0], task.target_x.shape[0], -1)
    return out[0] if num_samples is None else out


def conditional_sample(score, kernel, mean, schedule, task, rng=None, num_samples=None):
    '''Langevin-corrected conditional sampling of the outputs at the target inputs.

    Starting from y* ~ N(m(X*), K(X*, X*)) at T, every outer step noises the context according
    to the task's scheme, takes one Euler–Maruyama reverse step on the joint vector and keeps its
    target slots, then runs `inner_steps` Langevin steps at the new time. Optional terminal
    Langevin steps run at ε_clip.

    Parameters
    ----------
    score: ScoreModel
        Score on the joint input set [X_c, X*]
    kernel, mean: Kernel, Mean
        Limiting process
    schedule: DiffusionSchedule
    task: ConditioningTask
    rng: RngStream
        Defaults to a stream seeded with `task.seed`
    num_samples: int
        Number of independent draws; None returns a single (n*, d) draw

    Returns
    -------
    samples: np.array
        (n*, d) or (num_samples, n*, d)
    stats: ConditioningStats
    '''
    rng, S, times, state, targets, _ = _prepare(score, kernel, mean, schedule, task, rng, num_samples)
    stats = ConditioningStats(task.scheme)
    evaluations_before = score.num_evaluations
    noiser = ContextNoiser(task, schedule, kernel, mean, times, rng, S, stats)
    reverse = EulerMaruyamaIntegrator(schedule)
    for k in range(task.outer_steps):
        t, t_next = times[k], times[k + 1]
        context = noiser(t)
        joint = state.assemble(context, targets)
        updated = reverse.update(joint, t, t_next, state.score_at(t, joint), state.m, state.chol.lower, rng)
        targets = state.targets_of(updated, context)
        step = task.langevin_step_size or float(schedule.beta(t_next)) * (t - t_next)
        for _ in range(task.inner_steps):
            targets = _langevin_update(state, t_next, noiser(t_next), targets, step, rng)
    if task.terminal_langevin_steps:
        t_end = times[-1]
        step = task.langevin_step_size or float(schedule.beta(t_end)) * (times[-2] - t_end)
        for _ in range(task.terminal_langevin_steps):
            targets = _langevin_update(state, t_end, noiser(t_end), targets, step, rng)
    stats.score_evaluations = score.num_evaluations - evaluations_before
    logger.debug("conditional sample (%s): %d score evaluations, %d context draws", task.scheme,
                 stats.score_evaluations, stats.context_noise_draws)
    return _finish(targets, task, num_samples), stats


def replacement_sample(score, kernel, mean, schedule, task, rng=None, num_samples=None):
    '''Replacement-sampling baseline: clean context clamped, no Langevin correction.'''
    return conditional_sample(score, kernel, mean, schedule,
                              task.replace(scheme='no_noise', inner_steps=0, terminal_langevin_steps=0),
                              rng, num_samples)


def repaint_sample(score, kernel, mean, schedule, task, rng=None, num_samples=None):
    '''RePaint conditional sampling.

    Each outer step runs `inner_steps` cycles (at least one) of a reverse step on the joint vector,
    with the context freshly noised from the exact transition at t, followed by a forward
    Euler–Maruyama step of the targets back to t. The reverse-step result of the last cycle is kept.

    Returns
    -------
    samples: np.array
        (n*, d) or (num_samples, n*, d)
    stats: ConditioningStats
    '''
    task = task.replace(scheme='resample_every_inner')
    rng, S, times, state, targets, chol_t = _prepare(score, kernel, mean, schedule, task, rng, num_samples)
    stats = ConditioningStats('repaint')
    evaluations_before = score.num_evaluations
    noiser = ContextNoiser(task, schedule, kernel, mean, times, rng, S, stats)
    reverse = EulerMaruyamaIntegrator(schedule)
    m_t = mean(task.target_x).reshape(-1)
    cycles = max(task.inner_steps, 1)
    for k in range(task.outer_steps):
        t, t_next = times[k], times[k + 1]
        dt = t - t_next
        current = targets
        for cycle in range(cycles):
            context = noiser(t)
            joint = state.assemble(context, current)
            updated = reverse.update(joint, t, t_next, state.score_at(t, joint), state.m, state.chol.lower, rng)
            denoised = state.targets_of(updated, context)
            if cycle < cycles - 1:
                b = float(schedule.beta(t_next))
                noise = chol_t.matvec(rng.normal(size=denoised.shape))
                current = denoised + 0.5 * b * dt * (m_t - denoised) + np.sqrt(b * dt) * noise
        targets = denoised
    stats.score_evaluations = score.num_evaluations - evaluations_before
    return _finish(targets, task, num_samples), stats


def repaint_langevin_coefficients(gamma, rng=None, trials=5, dim=4):
    '''Drift and noise scales of one RePaint cycle at a fixed time, read off by composition.

    A reverse exponential-integrator step and an exact forward OU step, each spanning 2γ of B(t),
    are composed on random affine scores s(Y) = A Y + b with K = I. The composition is
    Y + c_drift s(Y) + c_noise Z; both coefficients are recovered numerically and compared
    with 2(1 − e^{−γ}) and √2 (1 − e^{−2γ})^{1/2}.

    Returns
    -------
    drift_scale, noise_scale: float

    Raises
    ------
    AcceptanceError
        If the composed coefficients deviate from the closed forms by more than 1e-12 (relative)
    '''
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    rng = RngStream(0) if rng is None else rng
    growth, drift, noise_back = exponential_coefficients(2 * gamma)
    decay, noise_forward = forward_coefficients(2 * gamma)
    expected_drift = -2 * math.expm1(-gamma)
    expected_noise = math.sqrt(2) * math.sqrt(-math.expm1(-2 * gamma))
    identity = np.eye(dim)
    for _ in range(trials):
        A = rng.normal(size=(dim, dim))
        b = rng.normal(size=dim)
        Y = rng.normal(size=dim)
        # Y_half = growth Y + drift s(Y) + noise_back Z1 ; Y_next = decay Y_half + noise_forward Z2
        linear = decay * (growth * identity + drift * A)
        offset = decay * drift * b
        noise_matrix = np.hstack([decay * noise_back * identity, noise_forward * identity])
        shift = (linear - identity) @ Y + offset
        s = A @ Y + b
        drift_scale = float(shift @ s / (s @ s))
        covariance = noise_matrix @ noise_matrix.T
        noise_scale = float(math.sqrt(np.trace(covariance) / dim))
        residual = np.max(np.abs(shift - drift_scale * s)) / np.max(np.abs(s))
        residual_cov = np.max(np.abs(covariance - noise_scale ** 2 * identity)) / noise_scale ** 2
        if (residual > 1e-12 or residual_cov > 1e-12 or
                abs(drift_scale - expected_drift) > 1e-12 * expected_drift or
                abs(noise_scale - expected_noise) > 1e-12 * expected_noise):
            raise AcceptanceError("composed RePaint step does not reduce to a Langevin step at gamma=" +
                                  str(gamma) + ": drift " + str(drift_scale) + " vs " + str(expected_drift) +
                                  ", noise " + str(noise_scale) + " vs " + str(expected_noise))
    return drift_scale, noise_scale


def noising_scheme_study(score, kernel, mean, schedule, context_x, context_y, target_x, oracle,
                         schemes=SCHEMES, inner_steps=(1, 5, 25), budget=5000, num_samples=4096, seed=0,
                         workers=None):
    '''KL of fitted conditional samples to an oracle posterior across schemes and inner step counts.

    The outer step count is N = budget / (L + 1) so that every run spends about `budget` score
    evaluations per sample. Runs are independent and may be spread over `workers` threads; each
    worker gets its own copy of the score and its own split of the seed.

    Parameters
    ----------
    oracle: GpPosterior
        Exact posterior at the targets

    Returns
    -------
    records: list of dict
        {scheme, L, N, kl_nats, score_evaluations, context_noise_draws}
    '''
    jobs = [(scheme, int(L)) for scheme in schemes for L in inner_steps]
    streams = RngStream(seed).split(len(jobs))

    def run(job, stream):
        scheme, L = job
        N = max(1, budget // (L + 1))
        task = ConditioningTask(context_x, context_y, target_x, scheme=scheme, outer_steps=N, inner_steps=L)
        samples, stats = conditional_sample(copy.deepcopy(score), kernel, mean, schedule, task, stream, num_samples)
        fitted_mean, fitted_cov = fit_gaussian(samples.reshape(num_samples, -1))
        kl = gaussian_kl(fitted_mean, fitted_cov, oracle.mean, oracle.covariance)
        logger.info("scheme %s, L=%d, N=%d: KL %.4f nats", scheme, L, N, kl)
        return dict(scheme=scheme, L=L, N=N, kl_nats=float(kl), score_evaluations=stats.score_evaluations,
                    context_noise_draws=stats.context_noise_draws)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(run, jobs, streams))
    return [run(job, stream) for job, stream in zip(jobs, streams)]
