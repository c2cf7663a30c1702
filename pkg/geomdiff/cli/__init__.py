import argparse
import json
import logging
import sys

from ..exceptions import AcceptanceError, ConfigError, GeomDiffError, NotPositiveDefiniteError, NumericalError
from ..version import version
from .runconfig import RunConfig, resolve
from .pipelines import pipeline_dict

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_ACCEPTANCE = 4


class ArgumentParser(argparse.ArgumentParser):
    '''argparse parser whose usage errors raise ConfigError instead of exiting.'''

    def error(self, message):
        raise ConfigError(self.prog + ": " + message)


def _int_list(value):
    return [int(v) for v in value.split(',') if v]


def _str_list(value):
    return [v for v in value.split(',') if v]


_dataset_flags = [
    ('--task', ('dataset', 'task'), dict(type=str, help="dataset task (se, matern52, weakly_periodic, sawtooth, "
                                                         "mixture, vec_se, vec_curlfree, vec_divfree)")),
    ('--n-train', ('dataset', 'n_train'), dict(type=int)),
    ('--n-test', ('dataset', 'n_test'), dict(type=int)),
    ('--n-points', ('dataset', 'n_points'), dict(type=int)),
    ('--inputs', ('dataset', 'inputs'), dict(choices=['random', 'grid'])),
]
_score_flags = [
    ('--checkpoint', ('checkpoint',), dict(type=str, help="model.npz written by `train`; default is the exact "
                                                          "Gaussian score of --task")),
    ('--task', ('task',), dict(type=str, help="Gaussian task of the exact score")),
    ('--kernel', ('kernel',), dict(type=str, help="limiting kernel of the exact score (white, se, matern52)")),
]
_train_flags = [
    ('--steps', ('train', 'steps'), dict(type=int)),
    ('--batch-size', ('train', 'batch_size'), dict(type=int)),
    ('--peak-lr', ('train', 'peak_lr'), dict(type=float)),
    ('--architecture', ('network', 'architecture'), dict(choices=['mlp', 'biattention', 'egnn_equivariant'])),
    ('--depth', ('network', 'depth'), dict(type=int)),
    ('--width', ('network', 'width'), dict(type=int)),
    ('--progress', ('train', 'progress'), dict(action='store_const', const=True)),
]

command_flags = {
    'data gen': _dataset_flags,
    'train': [
        ('--data', ('data',), dict(type=str, help="dataset folder written by `data gen`")),
        ('--kernel', ('kernel',), dict(type=str, help="limiting kernel (white, se, matern52)")),
        ('--parametrization', ('parametrization',), dict(choices=['none', 'precond_K', 'precond_ST',
                                                                   'predict_Y0'])),
    ] + _train_flags,
    'sample': _score_flags + [
        ('--num-samples', ('sde', 'num_samples'), dict(type=int)),
        ('--n-points', ('sde', 'n_points'), dict(type=int)),
        ('--steps', ('sde', 'steps'), dict(type=int)),
        ('--integrator', ('sde', 'integrator'), dict(choices=['euler_maruyama', 'exponential'])),
        ('--ode', ('sde', 'ode'), dict(action='store_const', const=True, help="probability-flow ODE sampler")),
        ('--trajectory', ('sde', 'store_trajectory'), dict(action='store_const', const=True)),
    ],
    'condition': [
        ('--task', ('task',), dict(type=str)),
        ('--kernel', ('kernel',), dict(type=str)),
        ('--scheme', ('conditioning', 'schemes'), dict(type=_str_list, help="comma-separated schemes or 'all'")),
        ('--inner-steps', ('conditioning', 'inner_steps'), dict(type=_int_list, help="e.g. 1,5,25")),
        ('--budget', ('conditioning', 'budget'), dict(type=int, help="score evaluations per sample")),
        ('--num-samples', ('conditioning', 'num_samples'), dict(type=int)),
        ('--n-context', ('conditioning', 'n_context'), dict(type=int)),
        ('--n-target', ('conditioning', 'n_target'), dict(type=int)),
        ('--workers', ('conditioning', 'workers'), dict(type=int)),
    ],
    'likelihood': _score_flags + [
        ('--data', ('data',), dict(type=str)),
        ('--n-context', ('likelihood', 'n_context'), dict(type=int)),
        ('--n-target', ('likelihood', 'n_target'), dict(type=int)),
        ('--num-paths', ('likelihood', 'num_paths'), dict(type=int)),
        ('--divergence', ('likelihood', 'divergence'), dict(choices=['exact_autodiff', 'hutchinson'])),
        ('--probes', ('likelihood', 'probes'), dict(type=int)),
        ('--steps', ('likelihood', 'steps'), dict(type=int)),
    ],
    'ablate': [
        ('--data', ('data',), dict(type=str)),
        ('--parametrizations', ('ablate', 'parametrizations'), dict(type=_str_list,
                                                                    help="comma-separated or 'all'")),
        ('--kernels', ('ablate', 'kernels'), dict(type=_str_list)),
        ('--tll-paths', ('ablate', 'tll_paths'), dict(type=int)),
        ('--ode-steps', ('ablate', 'ode_steps'), dict(type=int)),
    ] + _train_flags,
    'check': [
        ('--manifests', ('manifests',), dict(type=_str_list, help="comma-separated output folders to validate")),
    ],
    'plot': [
        ('--input', ('plot', 'input'), dict(type=str, help="CSV trace, e.g. loss.csv")),
        ('--column', ('plot', 'column'), dict(type=str)),
    ],
}

descriptions = {
    'data gen': "generate a synthetic dataset",
    'train': "train a score network by denoising score matching",
    'sample': "unconditional samples from the reverse SDE or probability-flow ODE",
    'condition': "noising-scheme study of Langevin-corrected conditional sampling",
    'likelihood': "conditional test log-likelihood through the probability-flow ODE",
    'ablate': "parametrization and limiting-kernel ablation",
    'check': "symmetry and oracle suites, manifest validation",
    'plot': "SVG line chart of a CSV trace",
}


def _common(parser):
    parser.add_argument('--config', default=None, help="JSON run configuration")
    parser.add_argument('--seed', type=int, default=None, help="overrides GEOMDIFF_SEED and the config")
    parser.add_argument('--out', default=None, help="output folder; overrides GEOMDIFF_OUT and the config")
    parser.add_argument('--verbose', action='store_true')


def _add_flags(parser, command):
    for flag, path, kwargs in command_flags[command]:
        parser.add_argument(flag, dest='param:' + '.'.join(path), default=None, **kwargs)


def build_parser():
    parser = ArgumentParser(prog='geomdiff', description="Geometric neural diffusion processes")
    parser.add_argument('--version', action='version', version='%(prog)s ' + version)
    subparsers = parser.add_subparsers(dest='command')
    data = subparsers.add_parser('data', help="dataset commands")
    data_sub = data.add_subparsers(dest='data_command')
    gen = data_sub.add_parser('gen', help=descriptions['data gen'])
    _common(gen)
    _add_flags(gen, 'data gen')
    for command in ('train', 'sample', 'condition', 'likelihood', 'ablate', 'check', 'plot'):
        sub = subparsers.add_parser(command, help=descriptions[command])
        _common(sub)
        _add_flags(sub, command)
    return parser


def flag_params(namespace):
    '''Nested dict of the flags given on the command line.'''
    params = {}
    for dest, value in vars(namespace).items():
        if not dest.startswith('param:') or value is None:
            continue
        keys = dest[len('param:'):].split('.')
        node = params
        for key in keys[:-1]:
            node = node.setdefault(key, {})
        node[keys[-1]] = value
    return params


def parse(argv):
    '''Parses argv into a resolved RunConfig plus the --verbose flag.'''
    args = build_parser().parse_args(argv)
    if args.command is None:
        raise ConfigError("missing subcommand; choose from " + str(sorted(pipeline_dict)))
    command = args.command
    if command == 'data':
        if getattr(args, 'data_command', None) is None:
            raise ConfigError("missing data subcommand; use `data gen`")
        command = 'data gen'
    run = resolve(command, args.config, flag_params(args), args.seed, args.out)
    return run, args.verbose


def _exit_code(error):
    if isinstance(error, AcceptanceError):
        return EXIT_ACCEPTANCE
    if isinstance(error, (NumericalError, NotPositiveDefiniteError)):
        return EXIT_NUMERIC
    return EXIT_CONFIG


def _report(error):
    print(json.dumps({"error": type(error).__name__, "message": str(error)}), file=sys.stderr)


def main(argv=None):
    '''Entry point of the `geomdiff` command; returns the exit code.'''
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        run, verbose = parse(argv)
    except GeomDiffError as e:
        _report(e)
        return _exit_code(e)
    logging.basicConfig(format=LOG_FORMAT, level=logging.DEBUG if verbose else logging.INFO)
    logger.debug("resolved configuration: %s", json.dumps(run.to_dict(), sort_keys=True))
    try:
        summary = pipeline_dict[run.command](run)
    except (GeomDiffError, ValueError, KeyError, FileNotFoundError) as e:
        _report(e)
        return _exit_code(e)
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK
