from .parametrization import Parametrization, PARAMETRIZATIONS, wrap_network, dsm_loss, definitional_dsm_loss, \
    to_preconditioned_score, from_preconditioned_score
from .scoremodel import ScoreModel, ExactGaussianScore, NetworkScore, score_forward
