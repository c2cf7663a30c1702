import numpy as np

from .autodiff import concatenate, silu, swapaxes
from .layers import MLP, Linear, MultiHeadAttention
from .scorenetwork import ScoreNetwork


class BiAttentionScoreNetwork(ScoreNetwork):
    '''Alternating self-attention over the point axis and over the output-dimension axis.

    Every output coordinate y_ik gets a hidden state of size `width` built from (x_i, y_ik) and
    the time features. Each layer adds both attention outputs through a SiLU gate, then a
    residual feed-forward block. The gate is smooth so the score can be used inside ODE
    likelihoods.
    '''
    architecture_name = 'biattention'

    def __init__(self, config):
        ScoreNetwork.__init__(self, config)
        rng = self.rng()
        width = config.width
        self.input_layer = Linear(config.x_dim + 1, width, rng)
        self.time_layer = Linear(config.time_embedding, width, rng)
        self.point_attention = [MultiHeadAttention(width, config.heads, rng) for _ in range(config.depth)]
        self.dim_attention = [MultiHeadAttention(width, config.heads, rng) for _ in range(config.depth)]
        self.feedforward = [MLP([width, width, width], rng, final_init_scale=0.5) for _ in range(config.depth)]
        self.output_layer = MLP([width, width, 1], rng, final_init_scale=0.0)
        self.skip = Linear(1, 1, rng, bias=False)

    def forward(self, t, X, Y):
        batch, n, d = Y.shape
        width = self.config.width
        X_per_dim = np.broadcast_to(X[:, :, None, :], (batch, n, d, X.shape[-1]))
        Y_cells = Y.reshape(batch, n, d, 1)
        temb = self.time_layer(self.time_features(t, batch)).reshape(batch, 1, 1, width)
        h = self.input_layer(concatenate([X_per_dim, Y_cells], axis=-1)) + temb
        for point_attention, dim_attention, feedforward in zip(self.point_attention, self.dim_attention,
                                                              self.feedforward):
            across_points = swapaxes(point_attention(swapaxes(h, 1, 2)), 1, 2)
            across_dims = dim_attention(h)
            h = h + silu(across_points + across_dims)
            h = h + feedforward(h)
        out = self.output_layer(h) + self.skip(Y_cells)
        return out.reshape(batch, n, d)
