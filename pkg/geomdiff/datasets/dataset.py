from dataclasses import dataclass, asdict, field
import logging
from pathlib import Path
import numpy as np

from ..kernels import KernelSpec, MeanSpec, kernel_from_spec, mean_from_spec
from ..numcore import RngStream
from ..io_tools import write_csv, read_csv, write_json, read_json
from .synthesize_gp_paths import synthesize_gp_paths
from .synthesize_sawtooth_paths import synthesize_sawtooth_paths, FREQUENCY_RANGE
from .synthesize_mixture_paths import synthesize_mixture_paths, MIXTURE_COMPONENTS

logger = logging.getLogger(__name__)

OBSERVATION_NOISE_VAR = 0.05 ** 2
VECTOR_LENGTHSCALE = float(np.sqrt(5.0))

TASK_KERNELS = {
    'se': KernelSpec('squared_exponential', variance=1.0, lengthscale=0.25),
    'matern52': KernelSpec('matern52', variance=1.0, lengthscale=0.25),
    'weakly_periodic': KernelSpec('weakly_periodic', variance=1.0, lengthscale=1.0, period=0.5,
                                  envelope_lengthscale=1.0),
    'vec_se': KernelSpec('diagonal', variance=1.0, lengthscale=VECTOR_LENGTHSCALE, output_dim=2,
                         base='squared_exponential'),
    'vec_curlfree': KernelSpec('curl_free', variance=1.0, lengthscale=VECTOR_LENGTHSCALE, output_dim=2),
    'vec_divfree': KernelSpec('div_free', variance=1.0, lengthscale=VECTOR_LENGTHSCALE, output_dim=2),
}
SCALAR_TASKS = ('se', 'matern52', 'weakly_periodic', 'sawtooth', 'mixture')
VECTOR_TASKS = ('vec_se', 'vec_curlfree', 'vec_divfree')
TASKS = SCALAR_TASKS + VECTOR_TASKS

# locally chosen hyperparameters, recorded in every dataset manifest
LOCAL_CHOICES = {
    'weakly_periodic': ['period', 'lengthscale', 'envelope_lengthscale'],
    'sawtooth': ['frequency_range', 'phase_range'],
}


@dataclass
class DatasetSpec:
    '''Synthetic dataset description.

    `inputs` is 'random' (uniform in `input_range`, or in the disk for vector tasks) or 'grid'
    (a regular grid of `n_points` on `input_range`, or the disk grid for vector tasks).
    `noise_var` defaults to 0.05² for 1-d Gaussian tasks and 0 otherwise. `kernel_params`
    overrides fields of the task's KernelSpec.
    '''
    task: str = 'se'
    n_train: int = 128
    n_test: int = 32
    n_points: int = 60
    input_range: tuple = (-2.0, 2.0)
    inputs: str = None
    grid_num: int = 30
    grid_extent: float = 10.0
    disk_radius: float = 10.0
    noise_var: float = None
    seed: int = 0
    kernel_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError("unknown task " + str(self.task) + "; choose from " + str(TASKS))
        if self.n_train < 1 or self.n_test < 0 or self.n_points < 1:
            raise ValueError("n_train and n_points must be positive and n_test non-negative")
        self.input_range = tuple(float(v) for v in self.input_range)
        if not self.input_range[0] < self.input_range[1]:
            raise ValueError("input_range must be nonempty")
        if self.inputs is None:
            self.inputs = 'grid' if self.is_vector else 'random'
        if self.inputs not in ('random', 'grid'):
            raise ValueError("inputs must be 'random' or 'grid'")
        if self.noise_var is None:
            self.noise_var = 0.0 if self.is_vector else OBSERVATION_NOISE_VAR
        if self.noise_var < 0:
            raise ValueError("noise_var must be non-negative")

    @property
    def is_vector(self):
        return self.task in VECTOR_TASKS

    @property
    def num_paths(self):
        return self.n_train + self.n_test

    def to_dict(self):
        d = asdict(self)
        d['input_range'] = list(self.input_range)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


class Dataset(object):
    '''Paths with inputs X (P, n, dx), outputs Y (P, n, dy) and the task label of every path.'''

    def __init__(self, X, Y, tasks, spec=None):
        self.X = np.asarray(X, dtype=float)
        self.Y = np.asarray(Y, dtype=float)
        if self.X.ndim != 3 or self.Y.ndim != 3 or self.X.shape[:2] != self.Y.shape[:2]:
            raise ValueError("X and Y must have shapes (P, n, dx) and (P, n, dy)")
        self.tasks = list(tasks)
        self.spec = spec

    def __len__(self):
        return self.X.shape[0]

    def __getitem__(self, i):
        return self.X[i], self.Y[i]

    def subset(self, indices):
        indices = np.asarray(indices, dtype=int)
        return Dataset(self.X[indices], self.Y[indices], [self.tasks[i] for i in indices], self.spec)

    def split(self, n_train):
        '''(train, test) datasets from the first `n_train` paths and the rest.'''
        return self.subset(np.arange(n_train)), self.subset(np.arange(n_train, len(self)))


def disk_grid(num=30, radius=10.0, extent=10.0):
    '''Points of the regular num × num grid on [−extent, extent]² inside the disk of `radius`.'''
    axis = np.linspace(-extent, extent, num)
    grid = np.stack(np.meshgrid(axis, axis, indexing='ij'), axis=-1).reshape(-1, 2)
    return grid[np.sum(grid ** 2, axis=1) <= radius ** 2 + 1e-9]


def task_model(task, kernel_params=None):
    '''(kernel, mean) of a Gaussian task, with optional KernelSpec field overrides.'''
    if task not in TASK_KERNELS:
        raise ValueError("task " + str(task) + " is not a Gaussian task")
    spec = KernelSpec.from_dict(dict(TASK_KERNELS[task].to_dict(), **(kernel_params or {})))
    kernel = kernel_from_spec(spec)
    return kernel, mean_from_spec(MeanSpec('zero', output_dim=kernel.output_dim))


def sample_inputs(spec, rng, num_paths):
    '''Inputs (P, n, dx) for a dataset spec.'''
    low, high = spec.input_range
    if spec.is_vector:
        if spec.inputs == 'grid':
            grid = disk_grid(spec.grid_num, spec.disk_radius, spec.grid_extent)
            return np.broadcast_to(grid, (num_paths,) + grid.shape).copy()
        radius = spec.disk_radius * np.sqrt(rng.uniform(size=(num_paths, spec.n_points)))
        angle = rng.uniform(0.0, 2 * np.pi, size=(num_paths, spec.n_points))
        return np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1)
    if spec.inputs == 'grid':
        grid = np.linspace(low, high, spec.n_points)[:, None]
        return np.broadcast_to(grid, (num_paths,) + grid.shape).copy()
    return rng.uniform(low, high, size=(num_paths, spec.n_points, 1))


def generate(spec, rng=None, num_paths=None):
    '''Generates n_train + n_test paths of a task.

    Parameters
    ----------
    spec: DatasetSpec
    rng: RngStream
        Defaults to a stream seeded with `spec.seed`
    num_paths: int
        Overrides n_train + n_test

    Returns
    -------
    dataset: Dataset
    '''
    rng = RngStream(spec.seed) if rng is None else rng
    num_paths = spec.num_paths if num_paths is None else int(num_paths)
    X = sample_inputs(spec, rng, num_paths)
    shared = spec.inputs == 'grid'
    if spec.task == 'sawtooth':
        Y = synthesize_sawtooth_paths(X, num_paths, rng)
        tasks = ['sawtooth'] * num_paths
    elif spec.task == 'mixture':
        models = {name: task_model(name) + (spec.noise_var,) for name in MIXTURE_COMPONENTS if name in TASK_KERNELS}
        Y, tasks = synthesize_mixture_paths(X, num_paths, rng, models)
    else:
        kernel, mean = task_model(spec.task, spec.kernel_params)
        Y = synthesize_gp_paths(kernel, mean, X[0] if shared else X, spec.noise_var, num_paths, rng)
        tasks = [spec.task] * num_paths
    logger.debug("generated %d %s paths of %d points", num_paths, spec.task, X.shape[1])
    return Dataset(X, Y, tasks, spec)


def split_context_target(X, Y, n_context_range=(1, 10), n_target=50, rng=None, return_indices=False):
    '''Splits one path into disjoint context and target sets.

    The context size is drawn uniformly from `n_context_range` (inclusive); `n_target` points
    follow in random order.

    Returns
    -------
    context: tuple
        (X_c, Y_c)
    target: tuple
        (X_t, Y_t)
    '''
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    low, high = n_context_range
    if low < 1 or high < low:
        raise ValueError("n_context_range must satisfy 1 <= low <= high")
    rng = RngStream(0) if rng is None else rng
    n_context = int(rng.integers(low, high + 1))
    if n_context + n_target > X.shape[0]:
        raise ValueError("path has " + str(X.shape[0]) + " points, fewer than " + str(n_context) +
                         " context plus " + str(n_target) + " targets")
    order = rng.permutation(X.shape[0])
    context, target = order[:n_context], order[n_context:n_context + n_target]
    out = (X[context], Y[context]), (X[target], Y[target])
    return out + (context, target) if return_indices else out


def _manifest(dataset):
    spec = dataset.spec
    d = dict(num_paths=len(dataset), n_points=dataset.X.shape[1], x_dim=dataset.X.shape[2],
             y_dim=dataset.Y.shape[2], tasks=dataset.tasks)
    if spec is not None:
        d.update(task=spec.task, seed=spec.seed, spec=spec.to_dict(),
                 local_choices={k: v for k, v in LOCAL_CHOICES.items()
                                if k == spec.task or (spec.task == 'mixture' and k in MIXTURE_COMPONENTS)})
        if spec.task in TASK_KERNELS:
            d['kernel'] = task_model(spec.task, spec.kernel_params)[0].to_spec().to_dict()
        if spec.task in ('sawtooth', 'mixture'):
            d['sawtooth'] = dict(frequency_range=list(FREQUENCY_RANGE), phase_range=[0.0, 1.0])
    return d


def save_dataset(dataset, folder):
    '''Writes one CSV per path (columns point, x0.., y0..) and a JSON manifest.'''
    folder = Path(folder)
    folder.mkdir(parents=True, exist_ok=True)
    dx, dy = dataset.X.shape[2], dataset.Y.shape[2]
    header = ['point'] + ['x' + str(k) for k in range(dx)] + ['y' + str(k) for k in range(dy)]
    for p in range(len(dataset)):
        rows = ([i] + list(dataset.X[p, i]) + list(dataset.Y[p, i]) for i in range(dataset.X.shape[1]))
        write_csv(folder / ('path_%05d.csv' % p), header, rows)
    write_json(folder / 'manifest.json', _manifest(dataset))
    return folder


def load_dataset(folder):
    folder = Path(folder)
    manifest = read_json(folder / 'manifest.json')
    dx = manifest['x_dim']
    X, Y = [], []
    for p in range(manifest['num_paths']):
        _, rows = read_csv(folder / ('path_%05d.csv' % p))
        values = np.array([[float(v) for v in row[1:]] for row in rows])
        X.append(values[:, :dx])
        Y.append(values[:, dx:])
    spec = DatasetSpec.from_dict(manifest['spec']) if 'spec' in manifest else None
    return Dataset(np.array(X), np.array(Y), manifest['tasks'], spec)
