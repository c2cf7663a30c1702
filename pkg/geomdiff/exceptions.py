import numpy as np


class GeomDiffError(Exception):
    '''Base class of every error raised on purpose by geomdiff.'''


class NotPositiveDefiniteError(GeomDiffError, np.linalg.LinAlgError):
    '''Cholesky factorisation failed after the whole jitter ladder was tried.'''


class NumericalError(GeomDiffError, ArithmeticError):
    '''A NaN or inf appeared in a loss, a sampler state or an ODE solve.'''


class ConfigError(GeomDiffError, ValueError):
    '''Invalid configuration document or flag combination.'''


class AcceptanceError(GeomDiffError, AssertionError):
    '''A verification suite failed its threshold.'''


def check_finite(array, what):
    if not np.all(np.isfinite(array)):
        raise NumericalError("non-finite values encountered in " + what)
