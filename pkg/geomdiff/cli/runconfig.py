from dataclasses import dataclass, asdict, field
import copy
import json
import os
from pathlib import Path

from ..exceptions import ConfigError

SEED_VARIABLE = 'GEOMDIFF_SEED'
OUT_VARIABLE = 'GEOMDIFF_OUT'
DEFAULT_OUT = 'geomdiff_out'


@dataclass
class RunConfig:
    '''Resolved configuration of one CLI run.

    `params` is the command-specific parameter tree (sections such as dataset, kernel, schedule,
    network, train, sde, conditioning, likelihood) after the config file, the environment and the
    flags have been merged.
    '''
    command: str
    seed: int = 0
    out: str = DEFAULT_OUT
    config_path: str = None
    params: dict = field(default_factory=dict)

    def section(self, name):
        return dict(self.params.get(name, {}))

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


def read_config_file(path):
    if path is None:
        return {}
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config file not found: " + str(path))
    try:
        with path.open() as f:
            document = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError("config file " + str(path) + " is not valid JSON: " + str(e))
    if not isinstance(document, dict):
        raise ConfigError("config file must hold a JSON object")
    return document


def _merge(base, overrides):
    out = copy.deepcopy(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def resolve(command, config_path=None, flag_params=None, seed=None, out=None, environ=None):
    '''Config file, then GEOMDIFF_SEED / GEOMDIFF_OUT, then explicit flags (highest priority).

    `flag_params` holds only the flags the user actually gave, as a nested dict of sections.
    '''
    environ = os.environ if environ is None else environ
    document = read_config_file(config_path)
    resolved_seed = document.pop('seed', 0)
    resolved_out = document.pop('out', DEFAULT_OUT)
    if environ.get(SEED_VARIABLE):
        try:
            resolved_seed = int(environ[SEED_VARIABLE])
        except ValueError:
            raise ConfigError(SEED_VARIABLE + " must be an integer, got " + repr(environ[SEED_VARIABLE]))
    if environ.get(OUT_VARIABLE):
        resolved_out = environ[OUT_VARIABLE]
    if seed is not None:
        resolved_seed = seed
    if out is not None:
        resolved_out = out
    params = _merge(document, flag_params or {})
    return RunConfig(command=command, seed=int(resolved_seed), out=str(resolved_out),
                     config_path=None if config_path is None else str(config_path), params=params)
