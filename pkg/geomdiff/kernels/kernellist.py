from .kernel import KernelSpec
from .scalarkernels import WhiteKernel, SquaredExponentialKernel, Matern52Kernel, PeriodicKernel, \
    WeaklyPeriodicKernel
from .matrixkernels import CurlFreeKernel, DivFreeKernel, DiagonalKernel, AnisotropicSquaredExponentialKernel


scalar_kernel_full_list = [
    WhiteKernel,
    SquaredExponentialKernel,
    Matern52Kernel,
    PeriodicKernel,
    WeaklyPeriodicKernel,
]

scalar_kernel_dict = {kernel_class.kernel_name: kernel_class for kernel_class in scalar_kernel_full_list}

kernel_full_list = scalar_kernel_full_list + [
    DiagonalKernel,
    CurlFreeKernel,
    DivFreeKernel,
    AnisotropicSquaredExponentialKernel,
]

kernel_dict = {kernel_class.kernel_name: kernel_class for kernel_class in kernel_full_list}
equivariant_kernel_list = [kernel_class for kernel_class in kernel_full_list if kernel_class.is_equivariant]


def _scalar_from_spec(family, spec):
    if family not in scalar_kernel_dict:
        raise ValueError("unknown scalar kernel family: " + str(family))
    kernel_class = scalar_kernel_dict[family]
    kwargs = dict(variance=spec.variance, lengthscale=spec.lengthscale)
    if family in ('periodic', 'weakly_periodic'):
        kwargs['period'] = spec.period
    if family == 'weakly_periodic':
        kwargs['envelope_lengthscale'] = spec.envelope_lengthscale
    return kernel_class(**kwargs)


def kernel_from_spec(spec):
    '''Builds a kernel from a KernelSpec (or its dict form).'''
    if isinstance(spec, dict):
        spec = KernelSpec.from_dict(spec)
    if spec.family in scalar_kernel_dict:
        return _scalar_from_spec(spec.family, spec)
    if spec.family == 'diagonal':
        return DiagonalKernel(_scalar_from_spec(spec.base, spec), output_dim=spec.output_dim)
    if spec.family in ('curl_free', 'div_free'):
        return kernel_dict[spec.family](spec.variance, spec.lengthscale, output_dim=spec.output_dim)
    if spec.family == 'anisotropic_squared_exponential':
        return AnisotropicSquaredExponentialKernel(spec.variance, spec.lengthscales, output_dim=spec.output_dim)
    raise ValueError("unknown kernel family: " + str(spec.family))
