from .autodiff import Tensor, Parameter
from .layers import Module, Linear, MLP, MultiHeadAttention, sinusoidal_embedding, grad_check
from .optim import Adam, WarmupCosineSchedule, ExponentialMovingAverage, clip_grad_norm
from .scorenetwork import NetworkConfig, ScoreNetwork, TranslationInvariantNetwork
from .networklist import *
