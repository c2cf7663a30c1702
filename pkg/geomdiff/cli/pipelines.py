'''Pipelines behind the CLI subcommands.

Every pipeline takes a resolved RunConfig, writes CSV/JSON outputs under `run.out`, finishes with a
manifest and returns a small JSON-serializable summary.
'''
import logging
from pathlib import Path
import numpy as np

from ..conditioning import SCHEMES, noising_scheme_study, repaint_langevin_coefficients
from ..datasets import DatasetSpec, TASK_KERNELS, generate, load_dataset, sample_inputs, save_dataset, \
    split_context_target, task_model
from ..exceptions import AcceptanceError, ConfigError, NumericalError
from ..gp import GpPosterior, gp_condition, gp_loglik, gp_sample
from ..io_tools import check_manifest, load_checkpoint, read_csv, save_checkpoint, write_csv, write_json, \
    write_manifest, write_svg_polyline
from ..kernels import AnisotropicSquaredExponentialKernel, CurlFreeKernel, DiagonalKernel, DivFreeKernel, \
    KernelSpec, LinearMean, MeanSpec, SquaredExponentialKernel, WhiteKernel, ZeroMean, divergence_of_kernel_column, \
    kernel_from_spec, mean_from_spec
from ..likelihood import DivergenceMode, conditional_log_likelihood, log_likelihood
from ..networks import NetworkConfig, build_network
from ..networks.training import TrainConfig, evaluate_dsm_loss, train_dsm
from ..numcore import RngStream
from ..samplers import SdeRunConfig, probability_flow_sample, reverse_sde_sample, write_trajectory_csv
from ..schedule import DiffusionSchedule
from ..scores import PARAMETRIZATIONS, ExactGaussianScore, NetworkScore, Parametrization
from ..symmetry import GroupElement, check_conditional_equivariance, check_distributional_invariance, \
    check_kernel_equivariance, check_permutation_equivariance, check_score_equivariance, random_group_element

logger = logging.getLogger(__name__)

KERNEL_ALIASES = {
    'white': 'white',
    'se': 'squared_exponential',
    'squared_exponential': 'squared_exponential',
    'matern52': 'matern52',
}
SCALAR_LIMIT_LENGTHSCALE = 0.25
INVARIANCE_SAMPLES = 10000
CHECK_THRESHOLDS = {
    'kernel_equivariance': 1e-10,
    'kernel_negative_control': 1e-3,
    'div_curl_property': 1e-5,
    'diagonal_negative_control': 1e-3,
    'exact_score_equivariance': 1e-9,
    'egnn_equivariance': 1e-5,
    'mlp_negative_control': 1e-3,
    'permutation_equivariance': 1e-10,
    'repaint_coefficients': 1e-12,
    'likelihood_oracle': 1e-2,
    'conditional_equivariance': 1e-9,
    'distributional_invariance': 3.0,
    'distributional_negative_control': 3.0,
}


def limiting_kernel_spec(kernel, y_dim):
    '''KernelSpec of the limiting process from a short name ('white', 'se', ...) or a spec dict.'''
    if isinstance(kernel, dict):
        return KernelSpec.from_dict(kernel)
    if y_dim > 1:
        if kernel in ('curl_free', 'div_free'):
            return KernelSpec(kernel, lengthscale=TASK_KERNELS['vec_se'].lengthscale, output_dim=y_dim)
        if kernel not in KERNEL_ALIASES:
            raise ConfigError("unknown limiting kernel " + str(kernel))
        return KernelSpec('diagonal', base=KERNEL_ALIASES[kernel], lengthscale=TASK_KERNELS['vec_se'].lengthscale,
                          output_dim=y_dim)
    if kernel not in KERNEL_ALIASES:
        raise ConfigError("unknown limiting kernel " + str(kernel) + "; choose from " + str(sorted(KERNEL_ALIASES)))
    return KernelSpec(KERNEL_ALIASES[kernel], lengthscale=SCALAR_LIMIT_LENGTHSCALE)


def _schedule(run):
    return DiffusionSchedule.from_dict(run.section('schedule'))


def _dataset_spec(run, **overrides):
    d = dict(run.section('dataset'), seed=run.seed)
    d.update(overrides)
    try:
        return DatasetSpec.from_dict(d)
    except ValueError as e:
        raise ConfigError(str(e))


def _dataset_files(folder):
    folder = Path(folder)
    return sorted(p for p in folder.rglob('*') if p.is_file())


def _load_split(folder, split):
    '''Loads `folder/split` when present, else `folder` itself.'''
    folder = Path(folder)
    if not folder.is_dir():
        raise ConfigError("dataset folder not found: " + str(folder))
    return load_dataset(folder / split if (folder / split).is_dir() else folder)


def _exact_score(run, task, schedule):
    if task not in TASK_KERNELS:
        raise ConfigError("the exact score needs a Gaussian task, got " + str(task))
    data_kernel, data_mean = task_model(task)
    spec = _dataset_spec(run, task=task)
    kernel = kernel_from_spec(limiting_kernel_spec(run.params.get('kernel', 'white'), data_kernel.output_dim))
    mean = ZeroMean(kernel.output_dim)
    score = ExactGaussianScore(kernel, mean, schedule, data_kernel, data_mean, spec.noise_var)
    return score, spec


def score_from_checkpoint(path):
    '''Rebuilds a NetworkScore from a checkpoint written by the `train` pipeline.'''
    header, state = load_checkpoint(path)
    network = build_network(header['network'])
    network.load_state_dict(state)
    schedule = DiffusionSchedule.from_dict(header['schedule'])
    return NetworkScore(network, Parametrization(header['parametrization'], schedule),
                        kernel_from_spec(header['kernel']), mean_from_spec(header['mean']), schedule), header


def _score(run, schedule):
    '''(score, DatasetSpec) from `--checkpoint` or from the exact Gaussian score of `task`.'''
    checkpoint = run.params.get('checkpoint')
    if checkpoint:
        score, header = score_from_checkpoint(checkpoint)
        task = 'vec_se' if header['network']['y_dim'] > 1 else 'se'
        return score, _dataset_spec(run, task=run.params.get('task', task))
    return _exact_score(run, run.params.get('task', 'se'), schedule)


def _build_model(run, kernel_name, parametrization, x_dim, y_dim, schedule):
    config = NetworkConfig.from_dict(dict(run.section('network'), x_dim=x_dim, y_dim=y_dim, seed=run.seed))
    spec = limiting_kernel_spec(kernel_name, y_dim)
    kernel = kernel_from_spec(spec)
    mean = mean_from_spec(MeanSpec('zero', output_dim=y_dim))
    if parametrization not in PARAMETRIZATIONS:
        raise ConfigError("unknown parametrization " + str(parametrization) + "; choose from " + str(PARAMETRIZATIONS))
    param = Parametrization(parametrization, schedule)
    model = NetworkScore(build_network(config), param, kernel, mean, schedule)
    header = dict(network=config.to_dict(), parametrization=parametrization, kernel=spec.to_dict(),
                  mean=mean.to_spec().to_dict(), schedule=schedule.to_dict())
    return model, header


def _train_config(run):
    return TrainConfig.from_dict(dict(run.section('train'), seed=run.seed))


def _write_samples(path, X, samples):
    samples = np.asarray(samples)
    dx, dy = X.shape[1], samples.shape[-1]
    header = ['sample', 'point'] + ['x' + str(k) for k in range(dx)] + ['y' + str(k) for k in range(dy)]
    rows = ([s, i] + list(X[i]) + list(samples[s, i]) for s in range(samples.shape[0]) for i in range(X.shape[0]))
    return write_csv(path, header, rows)


def run_data_gen(run):
    '''Generates a task dataset and writes train/ and test/ folders.'''
    spec = _dataset_spec(run)
    dataset = generate(spec)
    train, test = dataset.split(spec.n_train)
    out = Path(run.out)
    save_dataset(train, out / 'train')
    save_dataset(test, out / 'test')
    write_manifest(out, 'data gen', run.to_dict())
    logger.info("wrote %d train and %d test %s paths to %s", len(train), len(test), spec.task, out)
    return dict(task=spec.task, n_train=len(train), n_test=len(test), n_points=spec.n_points)


def _heldout(data):
    folder = Path(data) / 'test'
    return load_dataset(folder) if folder.is_dir() else None


def run_train(run):
    '''Trains a score network on a dataset folder and saves the checkpoint with its loss trace.'''
    data = run.params.get('data')
    if not data:
        raise ConfigError("train needs --data")
    dataset = _load_split(data, 'train')
    schedule = _schedule(run)
    model, header = _build_model(run, run.params.get('kernel', 'white'), run.params.get('parametrization', 'precond_K'),
                                 dataset.X.shape[2], dataset.Y.shape[2], schedule)
    train_config = _train_config(run)
    model, trace = train_dsm(model, dataset, schedule, model.parametrization, train_config)
    out = Path(run.out)
    save_checkpoint(out / 'model.npz', model.network, dict(header, train=train_config.to_dict()))
    write_csv(out / 'loss.csv', ['step', 'loss'], ([k, v] for k, v in enumerate(trace)))
    metrics = dict(first_loss=float(trace[0]), last_loss=float(trace[-1]))
    heldout = _heldout(data)
    if heldout is not None:
        metrics['heldout_loss'] = evaluate_dsm_loss(model, heldout, batch_size=train_config.batch_size,
                                                    seed=run.seed, t_floor=train_config.t_floor)
    write_json(out / 'metrics.json', metrics)
    write_manifest(out, 'train', run.to_dict(), inputs=_dataset_files(data))
    return metrics


def run_sample(run):
    '''Unconditional generation at grid inputs with the reverse SDE or the probability-flow ODE.'''
    schedule = _schedule(run)
    score, spec = _score(run, schedule)
    options = run.section('sde')
    num_samples = int(options.pop('num_samples', 16))
    ode = bool(options.pop('ode', False))
    n_points = int(options.pop('n_points', spec.n_points))
    config = SdeRunConfig.from_dict(dict(options, seed=run.seed))
    rng = RngStream(run.seed)
    grid_spec = _dataset_spec(run, task=spec.task, inputs='grid', n_points=n_points,
                              grid_num=int(run.section('dataset').get('grid_num', 10)))
    X = sample_inputs(grid_spec, rng, 1)[0]
    out = Path(run.out)
    if ode:
        samples = probability_flow_sample(score, score.kernel, score.mean, X, config, rng, num_samples)
    else:
        result = reverse_sde_sample(score, score.kernel, score.mean, X, config, rng, num_samples)
        samples = result
        if config.store_trajectory:
            samples, times, trajectory = result
            write_trajectory_csv(out / 'trajectory.csv', times, trajectory)
    _write_samples(out / 'samples.csv', X, samples)
    inputs = [run.params['checkpoint']] if run.params.get('checkpoint') else None
    write_manifest(out, 'sample', run.to_dict(), inputs=inputs)
    return dict(num_samples=num_samples, n_points=X.shape[0], sampler='ode' if ode else config.integrator,
                score_evaluations=score.num_evaluations)


def _as_list(value, cast):
    if isinstance(value, str):
        value = [v for v in value.split(',') if v]
    if not isinstance(value, (list, tuple)):
        value = [value]
    return [cast(v) for v in value]


def run_condition(run):
    '''Noising-scheme study: KL of fitted conditional samples to the GP posterior of the task.'''
    schedule = _schedule(run)
    options = run.section('conditioning')
    schemes = _as_list(options.get('schemes', 'all'), str)
    if schemes == ['all']:
        schemes = list(SCHEMES)
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise ConfigError("unknown scheme " + scheme + "; choose from " + str(SCHEMES) + " or all")
    inner_steps = _as_list(options.get('inner_steps', [1, 5, 25]), int)
    n_context = int(options.get('n_context', 3))
    n_target = int(options.get('n_target', 5))
    task = run.params.get('task', 'se')
    score, spec = _exact_score(run, task, schedule)
    rng = RngStream(run.seed)
    path = generate(_dataset_spec(run, task=task, n_points=n_context + n_target), rng, num_paths=1)
    (X_c, Y_c), (X_t, _) = split_context_target(path.X[0], path.Y[0], (n_context, n_context), n_target, rng)
    latent = gp_condition(score.data_kernel, score.data_mean, X_c, Y_c, X_t, spec.noise_var)
    oracle = GpPosterior(latent.mean, latent.covariance + spec.noise_var * np.eye(len(latent.mean)),
                         latent.context_count, latent.target_count)
    records = noising_scheme_study(score, score.kernel, score.mean, schedule, X_c, Y_c, X_t, oracle, schemes,
                                   inner_steps, int(options.get('budget', 5000)),
                                   int(options.get('num_samples', 4096)), run.seed, options.get('workers'))
    out = Path(run.out)
    write_json(out / 'study.json', dict(task=task, n_context=n_context, n_target=n_target, records=records))
    columns = ['scheme', 'L', 'N', 'kl_nats', 'score_evaluations', 'context_noise_draws']
    write_csv(out / 'study.csv', columns, ([r[c] for c in columns] for r in records))
    write_manifest(out, 'condition', run.to_dict())
    return dict(records=records)


def _likelihood_options(run):
    options = run.section('likelihood')
    mode = DivergenceMode(options.get('divergence', 'exact_autodiff'), int(options.get('probes', 8)))
    ode = SdeRunConfig(steps=int(options.get('steps', 100)), seed=run.seed)
    return options, mode, ode


def _tll(score, dataset, n_context, n_target, num_paths, ode, mode, rng):
    values = []
    for p in range(min(num_paths, len(dataset))):
        (X_c, Y_c), (X_t, Y_t) = split_context_target(dataset.X[p], dataset.Y[p], (n_context, n_context),
                                                      n_target, rng)
        values.append(conditional_log_likelihood(score, score.kernel, score.mean, X_c, Y_c, X_t, Y_t, ode, mode,
                                                 rng) / n_target)
    return values


def run_likelihood(run):
    '''Conditional test log-likelihood of held-out paths via the probability-flow ODE.'''
    schedule = _schedule(run)
    score, spec = _score(run, schedule)
    options, mode, ode = _likelihood_options(run)
    n_context = int(options.get('n_context', 3))
    n_target = int(options.get('n_target', 5))
    num_paths = int(options.get('num_paths', 1))
    data = run.params.get('data')
    rng = RngStream(run.seed)
    if data:
        dataset = _load_split(data, 'test')
        name = str(data)
    else:
        dataset = generate(_dataset_spec(run, task=spec.task), rng, num_paths=num_paths)
        name = spec.task
    per_path = _tll(score, dataset, n_context, n_target, num_paths, ode, mode, rng)
    report = dict(dataset=name, n_context=n_context, n_target=n_target, loglik=float(np.mean(per_path)),
                  per_path=per_path, divergence_mode=mode.to_dict())
    out = Path(run.out)
    write_json(out / 'likelihood.json', report)
    write_manifest(out, 'likelihood', run.to_dict(), inputs=_dataset_files(data) if data else None)
    return report


def run_ablate(run):
    '''Trains one model per (parametrization, limiting kernel) pair and reports losses and TLL.'''
    options = run.section('ablate')
    parametrizations = _as_list(options.get('parametrizations', 'all'), str)
    if parametrizations == ['all']:
        parametrizations = list(PARAMETRIZATIONS)
    kernels = _as_list(options.get('kernels', 'white,se'), str)
    data = run.params.get('data')
    if data:
        train, test = _load_split(data, 'train'), _heldout(data)
    else:
        spec = _dataset_spec(run)
        train, test = generate(spec).split(spec.n_train)
    if test is None or len(test) == 0:
        raise ConfigError("ablate needs held-out paths (a test/ folder or n_test > 0)")
    schedule = _schedule(run)
    train_config = _train_config(run)
    _, mode, ode = _likelihood_options(run)
    ode.steps = int(options.get('ode_steps', 20))
    n_context = int(options.get('n_context', 3))
    n_target = int(options.get('n_target', 5))
    rows = []
    for kernel_name in kernels:
        for parametrization in parametrizations:
            model, _ = _build_model(run, kernel_name, parametrization, train.X.shape[2], train.Y.shape[2], schedule)
            try:
                model, trace = train_dsm(model, train, schedule, model.parametrization, train_config)
                heldout = evaluate_dsm_loss(model, test, batch_size=train_config.batch_size, seed=run.seed,
                                            t_floor=train_config.t_floor)
                tll = _tll(model, test, n_context, n_target, int(options.get('tll_paths', 4)), ode, mode,
                           RngStream(run.seed))
            except NumericalError as error:
                logger.warning("ablation %s/%s diverged: %s", kernel_name, parametrization, error)
                rows.append(dict(kernel=kernel_name, parametrization=parametrization, first_loss=float('nan'),
                                 last_loss=float('nan'), heldout_loss=float('nan'), tll=float('nan'),
                                 diverged=True))
                continue
            rows.append(dict(kernel=kernel_name, parametrization=parametrization, first_loss=float(trace[0]),
                             last_loss=float(trace[-1]), heldout_loss=heldout, tll=float(np.mean(tll)),
                             diverged=False))
            logger.info("ablation %s/%s: held-out loss %.4f, TLL %.4f", kernel_name, parametrization, heldout,
                        rows[-1]['tll'])
    out = Path(run.out)
    columns = ['kernel', 'parametrization', 'first_loss', 'last_loss', 'heldout_loss', 'tll', 'diverged']
    write_csv(out / 'ablation.csv', columns, ([r[c] for c in columns] for r in rows))
    write_json(out / 'ablation.json', rows)
    write_manifest(out, 'ablate', run.to_dict(), inputs=_dataset_files(data) if data else None)
    return dict(rows=rows)


def _network_callable(architecture, dim, seed=0):
    network = build_network(NetworkConfig(architecture=architecture, x_dim=dim, y_dim=dim, depth=2, width=16,
                                          heads=2, seed=seed))
    return lambda t, X, Y: network(np.full(1, t), X[None], Y[None]).value[0]


def _div_curl_values(rng, trials=10):
    '''Largest finite-difference divergence (div-free), curl (curl-free) and diagonal divergence.'''
    kernels = dict(div_free=DivFreeKernel(1.0, 1.0, output_dim=2), curl_free=CurlFreeKernel(1.0, 1.0, output_dim=2),
                   diagonal=DiagonalKernel(SquaredExponentialKernel(1.0, 1.0), output_dim=2))
    values = {}
    for name, kernel in kernels.items():
        values[name] = max(abs(float(divergence_of_kernel_column(kernel, rng.normal(size=2), rng.normal(size=2),
                                                                 rng.normal(size=2)))) for _ in range(trials))
    return values


def _invariance_values(rng, seed, schedule, n_samples=INVARIANCE_SAMPLES):
    '''max z of the distributional checks: GP prior, exact-score reverse SDE and the m(x) = x control.'''
    kernel = SquaredExponentialKernel(1.0, 1.0)
    X = np.array([[-0.5, 0.2], [0.6, -0.4]])
    g = random_group_element(rng, 2, rep='trivial')
    score = ExactGaussianScore(WhiteKernel(), ZeroMean(), schedule, kernel, ZeroMean(), 0.01)

    def prior(points, stream, n):
        return gp_sample(kernel, ZeroMean(), points, 0.0, stream, size=n)

    def reverse(points, stream, n):
        return reverse_sde_sample(score, score.kernel, score.mean, points, SdeRunConfig(steps=50), stream, n)

    def drifting(points, stream, n):
        return gp_sample(kernel, LinearMean(1), points, 0.0, stream, size=n)

    shift = GroupElement(np.array([2.0]), np.eye(1), rep='trivial')
    return dict(gp_prior=check_distributional_invariance(prior, g, n_samples, X, seed)['max_z'],
                reverse_sde=check_distributional_invariance(reverse, g, n_samples, X, seed)['max_z'],
                linear_mean=check_distributional_invariance(drifting, shift, n_samples, np.array([[-0.5], [0.6]]),
                                                            seed)['max_z'])


def run_symmetry_suite(seed=0):
    '''Runs the symmetry and oracle checks; returns one record per check.'''
    rng = RngStream(seed)
    schedule = DiffusionSchedule()
    results = []

    def record(name, value, threshold, below=True):
        passed = value < threshold if below else value > threshold
        results.append(dict(check=name, value=float(value), threshold=threshold,
                            comparison='<' if below else '>', passed=bool(passed)))

    vector = dict(diagonal=DiagonalKernel(SquaredExponentialKernel(1.0, 1.0), output_dim=2),
                  curl_free=CurlFreeKernel(1.0, 1.0, output_dim=2), div_free=DivFreeKernel(1.0, 1.0, output_dim=2))
    for name, kernel in vector.items():
        record('kernel_equivariance_' + name, check_kernel_equivariance(kernel, 50, rng),
               CHECK_THRESHOLDS['kernel_equivariance'])
    record('kernel_equivariance_anisotropic',
           check_kernel_equivariance(AnisotropicSquaredExponentialKernel(1.0, (0.5, 2.0), output_dim=2), 50, rng),
           CHECK_THRESHOLDS['kernel_negative_control'], below=False)
    div_curl = _div_curl_values(rng)
    record('div_free_divergence', div_curl['div_free'], CHECK_THRESHOLDS['div_curl_property'])
    record('curl_free_curl', div_curl['curl_free'], CHECK_THRESHOLDS['div_curl_property'])
    record('diagonal_divergence', div_curl['diagonal'], CHECK_THRESHOLDS['diagonal_negative_control'], below=False)
    limit = DiagonalKernel(WhiteKernel(), output_dim=2)
    exact = ExactGaussianScore(limit, ZeroMean(2), schedule, DivFreeKernel(1.0, 1.0, output_dim=2), ZeroMean(2), 0.01)
    record('exact_score_equivariance', check_score_equivariance(exact, 20, rng),
           CHECK_THRESHOLDS['exact_score_equivariance'])
    record('conditional_equivariance',
           check_conditional_equivariance(DivFreeKernel(1.0, 1.0, output_dim=2), ZeroMean(2), 20, rng, noise_var=0.01),
           CHECK_THRESHOLDS['conditional_equivariance'])
    invariance = _invariance_values(rng, seed, schedule)
    record('distributional_invariance_gp_prior', invariance['gp_prior'], CHECK_THRESHOLDS['distributional_invariance'])
    record('distributional_invariance_reverse_sde', invariance['reverse_sde'],
           CHECK_THRESHOLDS['distributional_invariance'])
    record('distributional_linear_mean_control', invariance['linear_mean'],
           CHECK_THRESHOLDS['distributional_negative_control'], below=False)
    record('egnn_equivariance', check_score_equivariance(_network_callable('egnn_equivariant', 2, seed), 10, rng),
           CHECK_THRESHOLDS['egnn_equivariance'])
    record('mlp_negative_control', check_score_equivariance(_network_callable('mlp', 2, seed), 10, rng),
           CHECK_THRESHOLDS['mlp_negative_control'], below=False)
    for architecture in ('mlp', 'biattention', 'egnn_equivariant'):
        record('permutation_equivariance_' + architecture,
               check_permutation_equivariance(_network_callable(architecture, 2, seed), 5, rng, x_dim=2, y_dim=2),
               CHECK_THRESHOLDS['permutation_equivariance'])
    worst = 0.0
    for gamma in (1e-3, 1e-2, 1e-1):
        try:
            drift, noise = repaint_langevin_coefficients(gamma, rng)
        except AcceptanceError as e:
            logger.error(str(e))
            worst = np.inf
            continue
        worst = max(worst, abs(drift / (2 * -np.expm1(-gamma)) - 1),
                    abs(noise / np.sqrt(2 * -np.expm1(-2 * gamma)) - 1))
    record('repaint_coefficients', worst, CHECK_THRESHOLDS['repaint_coefficients'])
    data_kernel, data_mean = task_model('se')
    X = np.array([[-0.3], [0.0], [0.4]])
    y = np.array([[0.2], [-0.5], [0.9]])
    score = ExactGaussianScore(WhiteKernel(), ZeroMean(1), schedule, data_kernel, data_mean, 0.05 ** 2)
    ode_value = log_likelihood(score, score.kernel, score.mean, X, y, SdeRunConfig(steps=200))
    record('likelihood_oracle', abs(ode_value - gp_loglik(data_kernel, data_mean, X, y, 0.05 ** 2)),
           CHECK_THRESHOLDS['likelihood_oracle'])
    return results


def run_check(run):
    '''Symmetry and oracle suites plus manifest validation of earlier output folders.'''
    results = run_symmetry_suite(run.seed)
    manifest_problems = {}
    for folder in _as_list(run.params.get('manifests', []), str):
        problems = check_manifest(folder)
        manifest_problems[folder] = problems
        results.append(dict(check='manifest:' + folder, value=float(len(problems)), threshold=1.0, comparison='<',
                            passed=not problems))
    out = Path(run.out)
    write_json(out / 'check.json', dict(results=results, manifest_problems=manifest_problems))
    write_manifest(out, 'check', run.to_dict())
    failed = [r['check'] for r in results if not r['passed']]
    for r in results:
        logger.info("%s: %.3e (%s %.0e) %s", r['check'], r['value'], r['comparison'], r['threshold'],
                    'ok' if r['passed'] else 'FAILED')
    if failed:
        raise AcceptanceError("failed checks: " + ', '.join(failed))
    return dict(passed=len(results))


def run_plot(run):
    '''SVG line chart of one column of a CSV trace (default: loss.csv from `train`).'''
    options = run.section('plot')
    source = options.get('input')
    if not source:
        raise ConfigError("plot needs --input")
    column = options.get('column', 'loss')
    header, rows = read_csv(source)
    if column not in header:
        raise ConfigError("column " + column + " not in " + str(header))
    values = [float(row[header.index(column)]) for row in rows]
    out = Path(run.out)
    write_svg_polyline(out / (Path(source).stem + '.svg'), values, title=column)
    write_manifest(out, 'plot', run.to_dict(), inputs=[source])
    return dict(points=len(values))


pipeline_dict = {
    'data gen': run_data_gen,
    'train': run_train,
    'sample': run_sample,
    'condition': run_condition,
    'likelihood': run_likelihood,
    'ablate': run_ablate,
    'check': run_check,
    'plot': run_plot,
}
