import numpy as np

from .autodiff import concatenate, silu
from .layers import MLP, Linear
from .scorenetwork import ScoreNetwork


class EgnnScoreNetwork(ScoreNetwork):
    '''E(n)-equivariant message passing on vector fields (x_dim == y_dim).

    Edge messages depend only on invariants: radial features of |x_i − x_j|², y_i·y_j,
    (x_i − x_j)·y_i and (x_i − x_j)·y_j. The output at point i is

        v_i = mean_j [a_ij (x_i − x_j) + b_ij y_j] + c_i y_i

    with scalar coefficients a, b, c read off the messages and node states. No cross products
    are used, so reflections are respected as well as rotations.
    '''
    architecture_name = 'egnn_equivariant'
    radial_scales = (0.5, 1.0, 2.0, 4.0)

    def __init__(self, config):
        ScoreNetwork.__init__(self, config)
        if config.x_dim != config.y_dim:
            raise ValueError("egnn_equivariant needs x_dim == y_dim")
        rng = self.rng()
        width = config.width
        num_invariants = len(self.radial_scales) + 3
        self.node_input = MLP([1 + config.time_embedding, width, width], rng)
        self.edge_source = [Linear(width, width, rng, bias=False) for _ in range(config.depth)]
        self.edge_target = [Linear(width, width, rng, bias=False) for _ in range(config.depth)]
        self.edge_invariant = [Linear(num_invariants, width, rng) for _ in range(config.depth)]
        self.edge_mlp = [MLP([width, width], rng, final_activation=True) for _ in range(config.depth)]
        self.node_update = [MLP([2 * width, width, width], rng, final_init_scale=0.5) for _ in range(config.depth)]
        self.position_coefficient = [Linear(width, 1, rng, init_scale=0.1) for _ in range(config.depth)]
        self.vector_coefficient = [Linear(width, 1, rng, init_scale=0.1) for _ in range(config.depth)]
        self.self_coefficient = MLP([width, width, 1], rng, final_init_scale=0.1)

    def forward(self, t, X, Y):
        batch, n, d = Y.shape
        rel = X[:, :, None, :] - X[:, None, :, :]
        sq_dist = np.sum(rel ** 2, axis=-1, keepdims=True)
        radial = np.concatenate([np.exp(-sq_dist / (2 * s ** 2)) for s in self.radial_scales], axis=-1)
        Y_i = Y.reshape(batch, n, 1, d)
        Y_j = Y.reshape(batch, 1, n, d)
        invariants = concatenate([radial, (Y_i * Y_j).sum(axis=-1, keepdims=True),
                                  (Y_i * rel).sum(axis=-1, keepdims=True),
                                  (Y_j * rel).sum(axis=-1, keepdims=True)], axis=-1)
        temb = np.broadcast_to(self.time_features(t, batch)[:, None, :], (batch, n, self.config.time_embedding))
        h = self.node_input(concatenate([(Y * Y).sum(axis=-1, keepdims=True), temb], axis=-1))
        v = None
        for layer in range(self.config.depth):
            source = self.edge_source[layer](h).reshape(batch, n, 1, -1)
            target = self.edge_target[layer](h).reshape(batch, 1, n, -1)
            messages = self.edge_mlp[layer](silu(source + target + self.edge_invariant[layer](invariants)))
            h = h + self.node_update[layer](concatenate([h, messages.mean(axis=2)], axis=-1))
            update = (self.position_coefficient[layer](messages) * rel +
                      self.vector_coefficient[layer](messages) * Y_j).mean(axis=2)
            v = update if v is None else v + update
        return v + self.self_coefficient(h) * Y
