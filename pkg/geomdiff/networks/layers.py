import numpy as np

from .autodiff import Parameter, lift, softmax, activation_dict, swapaxes


class Module(object):
    '''Container of parameters and sub-modules, discovered from instance attributes.'''

    def named_parameters(self, prefix=''):
        for name in sorted(vars(self)):
            value = getattr(self, name)
            path = prefix + name
            if isinstance(value, Parameter):
                yield path, value
            elif isinstance(value, Module):
                yield from value.named_parameters(path + '.')
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(path + '.' + str(i) + '.')
                    elif isinstance(item, Parameter):
                        yield path + '.' + str(i), item

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def state_dict(self):
        return {name: p.value.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state):
        for name, p in self.named_parameters():
            if name not in state:
                raise KeyError("missing parameter in state: " + name)
            if state[name].shape != p.value.shape:
                raise ValueError("shape mismatch for parameter " + name)
            p.value = np.array(state[name], dtype=float)

    def num_parameters(self):
        return int(sum(p.value.size for p in self.parameters()))


class Linear(Module):
    '''x @ W + b with W of shape (in_features, out_features).'''

    def __init__(self, in_features, out_features, rng, bias=True, init_scale=1.0):
        self.weight = Parameter(rng.normal(size=(in_features, out_features)) * init_scale / np.sqrt(in_features))
        self.bias = Parameter(np.zeros(out_features)) if bias else None

    def __call__(self, x):
        out = lift(x) @ self.weight
        if self.bias is not None:
            out = out + self.bias
        return out


class MLP(Module):
    def __init__(self, sizes, rng, activation='silu', final_activation=False, final_init_scale=1.0):
        if len(sizes) < 2:
            raise ValueError("an MLP needs at least input and output sizes")
        self.layers = [Linear(sizes[i], sizes[i + 1], rng,
                              init_scale=final_init_scale if i == len(sizes) - 2 else 1.0)
                       for i in range(len(sizes) - 1)]
        self.activation = activation
        self.final_activation = final_activation

    def __call__(self, x):
        act = activation_dict[self.activation]
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i < len(self.layers) - 1 or self.final_activation:
                x = act(x)
        return x


class MultiHeadAttention(Module):
    '''Self-attention across the second-to-last axis of inputs shaped (..., L, width).

    No positional encoding is added, so the layer is equivariant to permutations of that axis.
    '''

    def __init__(self, width, heads, rng):
        if width % heads != 0:
            raise ValueError("width must be divisible by the number of heads")
        self.heads = heads
        self.query = Linear(width, width, rng, bias=False)
        self.key = Linear(width, width, rng, bias=False)
        self.value = Linear(width, width, rng, bias=False)
        self.output = Linear(width, width, rng)

    def _split(self, x):
        *lead, length, width = x.shape
        x = x.reshape(tuple(lead) + (length, self.heads, width // self.heads))
        return swapaxes(x, -2, -3)

    def _merge(self, x):
        x = swapaxes(x, -2, -3)
        *lead, length, heads, dh = x.shape
        return x.reshape(tuple(lead) + (length, heads * dh))

    def __call__(self, x):
        q = self._split(self.query(x))
        k = self._split(self.key(x))
        v = self._split(self.value(x))
        scores = (q @ swapaxes(k, -1, -2)) * (1.0 / np.sqrt(q.shape[-1]))
        return self.output(self._merge(softmax(scores, axis=-1) @ v))


def sinusoidal_embedding(t, size, max_period=10000.0, scale=1000.0):
    '''Sinusoidal features of diffusion times t of shape (B,), returned as (B, size).'''
    t = np.atleast_1d(np.asarray(t, dtype=float)) * scale
    half = size // 2
    freqs = np.exp(-np.log(max_period) * np.arange(half) / max(half, 1))
    angles = t[:, None] * freqs[None, :]
    emb = np.concatenate([np.sin(angles), np.cos(angles)], axis=-1)
    if size % 2 == 1:
        emb = np.concatenate([emb, np.zeros((len(t), 1))], axis=-1)
    return emb


def grad_check(function, parameters, h=1e-5, rng=None, max_entries=20):
    '''Largest relative error between tape gradients and central finite differences.

    Parameters
    ----------
    function: callable
        Zero-argument callable rebuilding the graph and returning a scalar Tensor
    parameters: list of Parameter
    h: float
        Finite-difference step
    rng: RngStream
        When given, only `max_entries` random entries per parameter are checked

    Returns
    -------
    max_error: float
    '''
    for p in parameters:
        p.zero_grad()
    function().backward()
    analytic = [np.array(p.grad) if p.grad is not None else np.zeros_like(p.value) for p in parameters]
    max_error = 0.0
    for p, grad in zip(parameters, analytic):
        flat = p.value.reshape(-1)
        indices = np.arange(flat.size)
        if rng is not None and flat.size > max_entries:
            indices = rng.permutation(flat.size)[:max_entries]
        for i in indices:
            original = flat[i]
            flat[i] = original + h
            plus = float(function().value)
            flat[i] = original - h
            minus = float(function().value)
            flat[i] = original
            numeric = (plus - minus) / (2 * h)
            exact = grad.reshape(-1)[i]
            error = abs(numeric - exact) / max(abs(numeric), abs(exact), 1.0)
            max_error = max(max_error, error)
    return max_error
