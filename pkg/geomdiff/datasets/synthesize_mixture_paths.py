import numpy as np

from .synthesize_gp_paths import synthesize_gp_paths
from .synthesize_sawtooth_paths import synthesize_sawtooth_paths

MIXTURE_COMPONENTS = ('se', 'matern52', 'weakly_periodic', 'sawtooth')


def synthesize_mixture_paths(X, num_paths, rng, component_models, components=MIXTURE_COMPONENTS):
    '''Each path comes from a component task chosen uniformly at random.

    Parameters
    ----------
    X: np.array
        Per-path inputs (P, n, 1)
    num_paths: int
    rng: RngStream
    component_models: dict
        Maps every Gaussian component name to a (kernel, mean, noise_var) triple
    components: tuple
        Component task names

    Returns
    -------
    Y: np.array
        Shape (P, n, 1)
    tasks: list
        Component name of every path
    '''
    X = np.asarray(X, dtype=float)
    choice = rng.integers(0, len(components), size=num_paths)
    Y = np.empty(X.shape[:2] + (1,))
    for c, name in enumerate(components):
        rows = np.flatnonzero(choice == c)
        if len(rows) == 0:
            continue
        if name == 'sawtooth':
            Y[rows] = synthesize_sawtooth_paths(X[rows], len(rows), rng)
        else:
            kernel, mean, noise_var = component_models[name]
            Y[rows] = synthesize_gp_paths(kernel, mean, X[rows], noise_var, len(rows), rng)
    return Y, [components[c] for c in choice]
