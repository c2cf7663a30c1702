'''Minimal reverse-mode automatic differentiation over numpy arrays.

Every primitive builds a `Tensor` holding its value, its parents and a closure mapping the
output adjoint to one adjoint per parent. `Tensor.backward` walks the graph in reverse
topological order. Broadcasting follows numpy; adjoints are summed back to parent shapes.
'''
import numpy as np


def unbroadcast(grad, shape):
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def lift(x):
    if isinstance(x, Tensor):
        return x
    return Tensor(x)


def _topological_order(root):
    order = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node.parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return order


class Tensor(object):
    # numpy must defer to Tensor operators when an ndarray is on the left
    __array_ufunc__ = None

    def __init__(self, value, parents=(), backward_fn=None, op='leaf', requires_grad=False):
        self.value = np.asarray(value, dtype=float)
        self.parents = tuple(parents)
        self.backward_fn = backward_fn
        self.op = op
        self.requires_grad = requires_grad or any(p.requires_grad for p in self.parents)
        self.grad = None

    @property
    def shape(self):
        return self.value.shape

    @property
    def ndim(self):
        return self.value.ndim

    def __repr__(self):
        return 'Tensor(op=' + self.op + ', shape=' + str(self.shape) + ')'

    def numpy(self):
        return self.value

    def backward(self, grad=None):
        '''Accumulates d(self)/d(leaf) · grad into the `.grad` of every leaf requiring gradients.'''
        if grad is None:
            grad = np.ones_like(self.value)
        order = _topological_order(self)
        for node in order:
            if node.backward_fn is not None:
                node.grad = None
        self.grad = np.asarray(grad, dtype=float)
        for node in reversed(order):
            if node.backward_fn is None or node.grad is None:
                continue
            parent_grads = node.backward_fn(node.grad)
            for parent, g in zip(node.parents, parent_grads):
                if g is None or not parent.requires_grad:
                    continue
                parent.grad = g if parent.grad is None else parent.grad + g

    # arithmetic
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __getitem__(self, index):
        return getitem(self, index)

    def sum(self, axis=None, keepdims=False):
        return tensor_sum(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return tensor_mean(self, axis, keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return transpose(self, axes if axes else None)

    def exp(self):
        return exp(self)

    def log(self):
        return log(self)

    def tanh(self):
        return tanh(self)

    def sigmoid(self):
        return sigmoid(self)

    def silu(self):
        return silu(self)

    def square(self):
        return square(self)

    def sqrt(self):
        return sqrt(self)


class Parameter(Tensor):
    '''Trainable leaf.'''

    def __init__(self, value, name=None):
        Tensor.__init__(self, np.array(value, dtype=float), requires_grad=True)
        self.name = name

    def zero_grad(self):
        self.grad = None


def add(a, b):
    a, b = lift(a), lift(b)
    return Tensor(a.value + b.value, (a, b),
                  lambda g: (unbroadcast(g, a.shape), unbroadcast(g, b.shape)), 'add')


def sub(a, b):
    a, b = lift(a), lift(b)
    return Tensor(a.value - b.value, (a, b),
                  lambda g: (unbroadcast(g, a.shape), unbroadcast(-g, b.shape)), 'sub')


def mul(a, b):
    a, b = lift(a), lift(b)
    return Tensor(a.value * b.value, (a, b),
                  lambda g: (unbroadcast(g * b.value, a.shape), unbroadcast(g * a.value, b.shape)), 'mul')


def div(a, b):
    a, b = lift(a), lift(b)
    return Tensor(a.value / b.value, (a, b),
                  lambda g: (unbroadcast(g / b.value, a.shape),
                             unbroadcast(-g * a.value / b.value ** 2, b.shape)), 'div')


def neg(a):
    return Tensor(-a.value, (a,), lambda g: (-g,), 'neg')


def power(a, exponent):
    exponent = float(exponent)
    return Tensor(a.value ** exponent, (a,), lambda g: (g * exponent * a.value ** (exponent - 1),), 'pow')


def matmul(a, b):
    '''Batched matrix product; both operands need at least two dimensions.'''
    a, b = lift(a), lift(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ValueError("matmul needs operands with at least two dimensions")

    def backward_fn(g):
        ga = g @ np.swapaxes(b.value, -1, -2)
        gb = np.swapaxes(a.value, -1, -2) @ g
        return unbroadcast(ga, a.shape), unbroadcast(gb, b.shape)
    return Tensor(a.value @ b.value, (a, b), backward_fn, 'matmul')


def _normalize_axes(axis, ndim):
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(sorted(ax % ndim for ax in axis))


def tensor_sum(a, axis=None, keepdims=False):
    axes = _normalize_axes(axis, a.ndim)

    def backward_fn(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g, a.shape),)
    return Tensor(a.value.sum(axis=axes, keepdims=keepdims), (a,), backward_fn, 'sum')


def tensor_mean(a, axis=None, keepdims=False):
    axes = _normalize_axes(axis, a.ndim)
    count = int(np.prod([a.shape[ax] for ax in axes]))
    return tensor_sum(a, axes, keepdims) * (1.0 / count)


def reshape(a, shape):
    return Tensor(a.value.reshape(shape), (a,), lambda g: (g.reshape(a.shape),), 'reshape')


def transpose(a, axes=None):
    if axes is None:
        axes = tuple(reversed(range(a.ndim)))
    inverse = tuple(np.argsort(axes))
    return Tensor(np.transpose(a.value, axes), (a,), lambda g: (np.transpose(g, inverse),), 'transpose')


def swapaxes(a, axis1, axis2):
    axes = list(range(a.ndim))
    axes[axis1], axes[axis2] = axes[axis2], axes[axis1]
    return transpose(a, tuple(axes))


def getitem(a, index):
    def backward_fn(g):
        out = np.zeros(a.shape)
        np.add.at(out, index, g)
        return (out,)
    return Tensor(a.value[index], (a,), backward_fn, 'getitem')


def concatenate(tensors, axis=-1):
    tensors = [lift(t) for t in tensors]
    axis = axis % tensors[0].ndim
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]
    return Tensor(np.concatenate([t.value for t in tensors], axis=axis), tensors,
                  lambda g: tuple(np.split(g, splits, axis=axis)), 'concatenate')


def broadcast_to(a, shape):
    return Tensor(np.broadcast_to(a.value, shape), (a,), lambda g: (unbroadcast(g, a.shape),), 'broadcast_to')


def exp(a):
    out = np.exp(a.value)
    return Tensor(out, (a,), lambda g: (g * out,), 'exp')


def log(a):
    return Tensor(np.log(a.value), (a,), lambda g: (g / a.value,), 'log')


def tanh(a):
    out = np.tanh(a.value)
    return Tensor(out, (a,), lambda g: (g * (1 - out ** 2),), 'tanh')


def _sigmoid(x):
    return 0.5 * (1 + np.tanh(0.5 * x))


def sigmoid(a):
    out = _sigmoid(a.value)
    return Tensor(out, (a,), lambda g: (g * out * (1 - out),), 'sigmoid')


def silu(a):
    s = _sigmoid(a.value)
    return Tensor(a.value * s, (a,), lambda g: (g * (s + a.value * s * (1 - s)),), 'silu')


def square(a):
    return Tensor(a.value ** 2, (a,), lambda g: (2 * g * a.value,), 'square')


def sqrt(a):
    out = np.sqrt(a.value)
    return Tensor(out, (a,), lambda g: (g / (2 * out),), 'sqrt')


def softmax(a, axis=-1):
    shifted = a.value - a.value.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward_fn(g):
        return (out * (g - np.sum(g * out, axis=axis, keepdims=True)),)
    return Tensor(out, (a,), backward_fn, 'softmax')


activation_dict = {
    'silu': silu,
    'tanh': tanh,
    'sigmoid': sigmoid,
}
