import numpy as np

from .autodiff import concatenate, broadcast_to
from .layers import MLP, Linear
from .scorenetwork import ScoreNetwork


class MlpScoreNetwork(ScoreNetwork):
    '''Point-wise encoder with a mean-pooled summary of the whole set, then a point-wise decoder.

    Inputs per point are (x_i, y_i, time features). A linear skip from y_i is added to the
    decoder output. Nothing ties the outputs to rotations of the inputs.
    '''
    architecture_name = 'mlp'

    def __init__(self, config):
        ScoreNetwork.__init__(self, config)
        rng = self.rng()
        width = config.width
        in_features = config.x_dim + config.y_dim + config.time_embedding
        self.encoder = MLP([in_features] + [width] * config.depth, rng, final_activation=True)
        self.decoder = MLP([2 * width, width, config.y_dim], rng, final_init_scale=0.0)
        self.skip = Linear(config.y_dim, config.y_dim, rng, bias=False)

    def forward(self, t, X, Y):
        batch, n = Y.shape[:2]
        temb = np.broadcast_to(self.time_features(t, batch)[:, None, :], (batch, n, self.config.time_embedding))
        h = self.encoder(concatenate([X, Y, temb], axis=-1))
        pooled = broadcast_to(h.mean(axis=1, keepdims=True), h.shape)
        return self.decoder(concatenate([h, pooled], axis=-1)) + self.skip(Y)
