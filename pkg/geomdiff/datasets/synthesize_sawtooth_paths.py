import numpy as np

FREQUENCY_RANGE = (3.0, 5.0)


def sawtooth(x, frequency, phase):
    return np.mod(frequency * x + phase, 1.0)


def synthesize_sawtooth_paths(X, num_paths, rng, frequency_range=FREQUENCY_RANGE):
    '''Sawtooth waves y(x) = frac(f x + φ) with f ~ U[frequency_range] and φ ~ U[0, 1].

    Values lie in [0, 1). Inputs are (n, 1) shared or (P, n, 1) per path; returns (P, n, 1).
    '''
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        X = np.broadcast_to(X, (num_paths,) + X.shape)
    frequency = rng.uniform(frequency_range[0], frequency_range[1], size=num_paths)
    phase = rng.uniform(0.0, 1.0, size=num_paths)
    return sawtooth(X[..., :1], frequency[:, None, None], phase[:, None, None])
