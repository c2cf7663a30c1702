import numpy as np

from ..kernels import as_points
from ..numcore import cholesky_with_jitter, mvn_sample


def synthesize_gp_paths(kernel, mean, X, noise_var, num_paths, rng):
    '''Draws paths from GP(m, k) plus observation noise.

    Parameters
    ----------
    kernel: Kernel
    mean: Mean
    X: np.array
        Inputs shared by every path (n, dx), or one input set per path (P, n, dx)
    noise_var: float
        Observation noise variance
    num_paths: int
    rng: RngStream

    Returns
    -------
    Y: np.array
        Shape (P, n, d)
    '''
    X = np.asarray(X, dtype=float)
    if X.ndim == 3:
        if X.shape[0] != num_paths:
            raise ValueError("per-path inputs must have num_paths rows")
        return np.stack([synthesize_gp_paths(kernel, mean, x, noise_var, 1, rng)[0] for x in X])
    X = as_points(X)
    K = kernel.gram(X) + noise_var * np.eye(X.shape[0] * kernel.output_dim)
    flat = mvn_sample(mean(X).reshape(-1), cholesky_with_jitter(K), rng, size=num_paths)
    return flat.reshape(num_paths, X.shape[0], kernel.output_dim)
