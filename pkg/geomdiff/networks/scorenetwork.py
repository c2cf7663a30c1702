from abc import ABC, abstractmethod
from dataclasses import dataclass, asdict
import numpy as np

from ..numcore import RngStream
from .autodiff import lift
from .layers import Module, sinusoidal_embedding


@dataclass
class NetworkConfig:
    architecture: str = 'biattention'
    depth: int = 3
    width: int = 64
    heads: int = 4
    time_embedding: int = 16
    translation_invariant: bool = False
    x_dim: int = 1
    y_dim: int = 1
    input_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.depth < 1 or self.width < 1 or self.heads < 1 or self.time_embedding < 1:
            raise ValueError("network depth, width, heads and time_embedding must be positive")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


class ScoreNetwork(Module, ABC):
    '''Trainable F_θ(t, X, Y) mapping a batch of fields to a field of the same shape.

    Inputs: t of shape (B,), X of shape (B, n, x_dim) (constant), Y of shape (B, n, y_dim)
    (array or Tensor). Output: Tensor of shape (B, n, y_dim). Every architecture is
    equivariant to permutations of the point axis.
    '''
    architecture_name = None

    def __init__(self, config):
        self.config = config
        self.x_dim = config.x_dim
        self.y_dim = config.y_dim

    def rng(self):
        return RngStream(self.config.seed)

    def time_features(self, t, batch):
        t = np.broadcast_to(np.asarray(t, dtype=float), (batch,))
        return sinusoidal_embedding(t, self.config.time_embedding)

    @abstractmethod
    def forward(self, t, X, Y):
        pass

    def __call__(self, t, X, Y):
        Y = lift(Y)
        X = np.asarray(X, dtype=float)
        if X.ndim == 2:
            X = np.broadcast_to(X, (Y.shape[0],) + X.shape)
        if X.shape[:2] != Y.shape[:2] or X.shape[-1] != self.x_dim or Y.shape[-1] != self.y_dim:
            raise ValueError("inconsistent shapes: X " + str(X.shape) + ", Y " + str(Y.shape))
        return self.forward(t, X / self.config.input_scale, Y)


class TranslationInvariantNetwork(ScoreNetwork):
    '''Wraps a parent network and feeds it centred inputs.'''

    def __init__(self, parent):
        ScoreNetwork.__init__(self, parent.config)
        self.parent = parent
        self.architecture_name = parent.architecture_name

    def forward(self, t, X, Y):
        return self.parent.forward(t, X - X.mean(axis=1, keepdims=True), Y)
