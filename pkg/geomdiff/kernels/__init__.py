from .kernel import Kernel, ScalarKernel, KernelSpec, gram, as_points
from .scalarkernels import WhiteKernel, SquaredExponentialKernel, Matern52Kernel, PeriodicKernel, \
    WeaklyPeriodicKernel
from .matrixkernels import CurlFreeKernel, DivFreeKernel, DiagonalKernel, AnisotropicSquaredExponentialKernel, \
    equivariant_block, divergence_of_kernel_column
from .mean import Mean, MeanSpec, ZeroMean, ConstantMean, LinearMean, TableMean, CallableMean, mean_from_spec
from .kernellist import *
