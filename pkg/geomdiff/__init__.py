from .exceptions import GeomDiffError, NotPositiveDefiniteError, NumericalError, ConfigError, AcceptanceError
from .numcore import RngStream, CholeskyFactor, cholesky_with_jitter, mvn_sample, mvn_logpdf, gaussian_kl, \
    fit_gaussian
from .kernels import *
from .gp import GpPosterior, gp_sample, gp_condition, gp_loglik, gp_predictive_loglik
from .schedule import DiffusionSchedule, transition_mean, transition_moments, conditional_score, \
    marginal_moments, exact_marginal_score, simulate_forward_sde
from .scores import *
from .networks import *
from .networks.training import TrainConfig, train_dsm, evaluate_dsm_loss

from . import datasets
from .io_tools import write_csv, read_csv, write_json, read_json, write_manifest, check_manifest, \
    save_checkpoint, load_checkpoint
from .samplers import SdeRunConfig, reverse_sde_sample, probability_flow_sample, langevin_steps, \
    integrator_full_list, integrator_dict
from .conditioning import ConditioningTask, ConditioningStats, conditional_sample, replacement_sample, \
    repaint_sample, noising_scheme_study, scheme_costs
from .likelihood import DivergenceMode, divergence, log_likelihood, conditional_log_likelihood, consistency_gap
from .symmetry import GroupElement, random_group_element, check_kernel_equivariance, check_score_equivariance, \
    check_permutation_equivariance, check_conditional_equivariance, check_distributional_invariance

from .version import version as __version__
