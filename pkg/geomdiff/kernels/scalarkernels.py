import numpy as np

from .kernel import ScalarKernel

WHITE_TOLERANCE = 1e-12


class WhiteKernel(ScalarKernel):
    '''σ² δ(x, x'); numerically identical inputs count as equal.'''
    kernel_name = 'white'

    def profile(self, r):
        return self.variance * (r <= WHITE_TOLERANCE).astype(float)


class SquaredExponentialKernel(ScalarKernel):
    kernel_name = 'squared_exponential'

    def profile(self, r):
        return self.variance * np.exp(-0.5 * (r / self.lengthscale) ** 2)


class Matern52Kernel(ScalarKernel):
    kernel_name = 'matern52'

    def profile(self, r):
        s = np.sqrt(5.0) * r / self.lengthscale
        return self.variance * (1 + s + s ** 2 / 3.0) * np.exp(-s)


class PeriodicKernel(ScalarKernel):
    kernel_name = 'periodic'

    def __init__(self, variance=1.0, lengthscale=1.0, period=1.0, output_dim=1):
        ScalarKernel.__init__(self, variance, lengthscale, output_dim)
        if period <= 0:
            raise ValueError("period must be positive")
        self.period = float(period)

    def profile(self, r):
        return self.variance * np.exp(-2 * np.sin(np.pi * r / self.period) ** 2 / self.lengthscale ** 2)

    def to_spec(self):
        spec = ScalarKernel.to_spec(self)
        spec.period = self.period
        return spec


class WeaklyPeriodicKernel(PeriodicKernel):
    '''Periodic factor times a squared-exponential envelope.'''
    kernel_name = 'weakly_periodic'

    def __init__(self, variance=1.0, lengthscale=1.0, period=1.0, envelope_lengthscale=1.0, output_dim=1):
        PeriodicKernel.__init__(self, variance, lengthscale, period, output_dim)
        if envelope_lengthscale <= 0:
            raise ValueError("envelope_lengthscale must be positive")
        self.envelope_lengthscale = float(envelope_lengthscale)

    def profile(self, r):
        envelope = np.exp(-0.5 * (r / self.envelope_lengthscale) ** 2)
        return PeriodicKernel.profile(self, r) * envelope

    def to_spec(self):
        spec = PeriodicKernel.to_spec(self)
        spec.envelope_lengthscale = self.envelope_lengthscale
        return spec
