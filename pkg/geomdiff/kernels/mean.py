from abc import ABC, abstractmethod
from dataclasses import dataclass, asdict, field
import numpy as np

from .kernel import as_points


@dataclass
class MeanSpec:
    '''Serializable mean function: kind is zero, constant, linear or custom (lookup table).'''
    kind: str = 'zero'
    output_dim: int = 1
    value: list = field(default_factory=list)
    table_inputs: list = field(default_factory=list)
    table_values: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)


class Mean(ABC):
    '''Mean function m: inputs (n, dx) -> outputs (n, d).'''
    mean_name = None

    def __init__(self, output_dim=1):
        self.output_dim = int(output_dim)

    @abstractmethod
    def _evaluate(self, X):
        pass

    def __call__(self, X):
        return self._evaluate(as_points(X)).reshape(-1, self.output_dim)

    def to_spec(self):
        return MeanSpec(kind=self.mean_name, output_dim=self.output_dim)


class ZeroMean(Mean):
    mean_name = 'zero'

    def _evaluate(self, X):
        return np.zeros((X.shape[0], self.output_dim))


class ConstantMean(Mean):
    mean_name = 'constant'

    def __init__(self, value, output_dim=1):
        Mean.__init__(self, output_dim)
        self.value = np.broadcast_to(np.asarray(value, dtype=float), (self.output_dim,)).copy()

    def _evaluate(self, X):
        return np.tile(self.value, (X.shape[0], 1))

    def to_spec(self):
        spec = Mean.to_spec(self)
        spec.value = [float(v) for v in self.value]
        return spec


class LinearMean(Mean):
    '''m(x) = x; breaks translation invariance on purpose.'''
    mean_name = 'linear'

    def _evaluate(self, X):
        if X.shape[1] != self.output_dim:
            raise ValueError("linear mean needs input and output dimensions to agree")
        return X.copy()


class TableMean(Mean):
    '''Nearest-neighbour lookup into a table of (input, value) pairs.'''
    mean_name = 'custom'

    def __init__(self, inputs, values):
        inputs = as_points(inputs)
        values = np.asarray(values, dtype=float).reshape(inputs.shape[0], -1)
        Mean.__init__(self, values.shape[1])
        self.inputs = inputs
        self.values = values

    def _evaluate(self, X):
        d2 = np.sum((X[:, None, :] - self.inputs[None, :, :]) ** 2, axis=-1)
        return self.values[np.argmin(d2, axis=1)]

    def to_spec(self):
        spec = Mean.to_spec(self)
        spec.table_inputs = self.inputs.tolist()
        spec.table_values = self.values.tolist()
        return spec


class CallableMean(Mean):
    '''Wraps a Python callable; cannot be serialized.'''
    mean_name = 'callable'

    def __init__(self, function, output_dim=1):
        Mean.__init__(self, output_dim)
        self.function = function

    def _evaluate(self, X):
        return np.asarray(self.function(X), dtype=float)

    def to_spec(self):
        raise NotImplementedError("callable means cannot be serialized; use a table")


def mean_from_spec(spec):
    if isinstance(spec, dict):
        spec = MeanSpec.from_dict(spec)
    if spec.kind == 'zero':
        return ZeroMean(spec.output_dim)
    if spec.kind == 'constant':
        return ConstantMean(spec.value if len(spec.value) else 0.0, spec.output_dim)
    if spec.kind == 'linear':
        return LinearMean(spec.output_dim)
    if spec.kind == 'custom':
        return TableMean(spec.table_inputs, spec.table_values)
    raise ValueError("unknown mean kind: " + str(spec.kind))
