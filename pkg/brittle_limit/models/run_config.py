"""JSON run descriptions for the command-line tools.

Every command has a fixed set of keys; anything else is rejected before any
computation starts.
"""
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple
import json
import math
import os

import numpy as np

from .errors import ConfigError
from .params import ModelParams
from .tensors import SymMat

_PARAM_KEYS = ('lambda_w', 'mu_w', 'lambda_s', 'mu_s', 'kappa', 'alpha', 'eta_schedule')


def parse_params(data: Any) -> ModelParams:
    if data is None:
        return ModelParams()
    if not isinstance(data, dict):
        raise ConfigError(f"'params' must be an object, got {type(data).__name__}")
    unknown = set(data) - set(_PARAM_KEYS)
    if unknown:
        raise ConfigError(f"Unknown parameter keys: {sorted(unknown)}")
    schedule = data.get('eta_schedule')
    if schedule is not None:
        if not isinstance(schedule, dict) or set(schedule) - {'kind', 'exponent'}:
            raise ConfigError(f"'eta_schedule' must be {{kind, exponent}}, got {schedule!r}")
    try:
        return ModelParams.from_dict(data)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid model parameters: {e}") from e


def parse_strain(data: Any) -> SymMat:
    """A strain is a nested square matrix or {"dim": n, "entries": [...]} in packed order."""
    try:
        if isinstance(data, dict):
            if set(data) - {'dim', 'entries'}:
                raise ConfigError(f"Unknown strain keys: {sorted(set(data) - {'dim', 'entries'})}")
            return SymMat(int(data['dim']), tuple(data['entries']))
        matrix = np.asarray(data, dtype=float)
        if not np.allclose(matrix, matrix.T, rtol=0.0, atol=0.0):
            raise ConfigError(f"Strain matrix must be symmetric: {data}")
        return SymMat.from_matrix(matrix)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Invalid strain {data!r}: {e}") from e


def _strain_list(data: Any) -> List[SymMat]:
    if not isinstance(data, list) or not data:
        raise ConfigError("'xi' must be a non-empty list of strains")
    return [parse_strain(item) for item in data]


def _positive_list(data: Any) -> List[float]:
    if not isinstance(data, list) or not data:
        raise ConfigError("expected a non-empty list of positive numbers")
    values = [_positive(v) for v in data]
    return values


def _positive(data: Any) -> float:
    if isinstance(data, bool) or not isinstance(data, (int, float)) or not math.isfinite(data) or data <= 0:
        raise ConfigError(f"expected a positive number, got {data!r}")
    return float(data)


def _positive_int(data: Any) -> int:
    if isinstance(data, bool) or not isinstance(data, int) or data < 1:
        raise ConfigError(f"expected a positive integer, got {data!r}")
    return data


def _flag(data: Any) -> bool:
    if not isinstance(data, bool):
        raise ConfigError(f"expected true or false, got {data!r}")
    return data


def _choice(*options: str) -> Callable[[Any], str]:
    def parse(data: Any) -> str:
        if data not in options:
            raise ConfigError(f"expected one of {list(options)}, got {data!r}")
        return data
    return parse


def _vector(data: Any) -> np.ndarray:
    try:
        vector = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid vector {data!r}") from e
    if vector.shape != (2,):
        raise ConfigError(f"expected a vector of R^2, got {data!r}")
    return vector


def _ray(data: Any) -> Dict[str, Any]:
    if not isinstance(data, dict) or set(data) - {'xi', 't_max', 'steps'} or 'xi' not in data:
        raise ConfigError(f"'ray' must be {{xi, t_max, steps}}, got {data!r}")
    return {
        'xi': parse_strain(data['xi']),
        't_max': _positive(data.get('t_max', 10.0)),
        'steps': _positive_int(data.get('steps', 101))
    }


def _names(data: Any) -> List[str]:
    if not isinstance(data, list) or not all(isinstance(v, str) for v in data):
        raise ConfigError(f"expected a list of names, got {data!r}")
    return data


def _seed(data: Any) -> int:
    if isinstance(data, bool) or not isinstance(data, int) or data < 0:
        raise ConfigError(f"expected a non-negative integer seed, got {data!r}")
    return data


def _path(data: Any) -> str:
    if not isinstance(data, str) or not data:
        raise ConfigError(f"expected a path, got {data!r}")
    return data


_COMMON = {'params': parse_params, 'seed': _seed, 'out': _path, 'jobs': _positive_int}

SCHEMAS: Dict[str, Dict[str, Callable[[Any], Any]]] = {
    'density': {'xi': _strain_list, 'ray': _ray, 'eps': _positive, 'tresca': _flag},
    'converge': {'xi': _strain_list, 'eps_list': _positive_list, 'tresca': _flag},
    'laminate': {'case': _choice('one', 'two'), 'xi': parse_strain, 'a': _vector, 'b': _vector,
                 'eps_list': _positive_list, 'n_layers': _positive_int},
    'solve': {'regime': _choice('trivial', 'hencky', 'elastic', 'tresca'), 'xi_bc': parse_strain,
              'eps_list': _positive_list, 'grid': _positive_int,
              'init': _choice('undamaged', 'random', 'laminate', 'frame'), 'bc': _choice('affine', 'lateral'),
              'tol': _positive, 'max_iters': _positive_int, 'tresca': _flag},
    'verify': {'samples': _positive_int, 'only': _names},
}

# at least one key of each group must be present
REQUIRED: Dict[str, Tuple[Tuple[str, ...], ...]] = {
    'density': (('xi', 'ray'),),
    'converge': (('xi',),),
    'laminate': (('xi', 'a'),),
    'solve': (('regime',), ('xi_bc',)),
    'verify': (),
}

DEFAULTS: Dict[str, Dict[str, Any]] = {
    'density': {'eps': 0.1, 'tresca': False},
    'converge': {'eps_list': [1e-1, 1e-2, 1e-3, 1e-4], 'tresca': False},
    'laminate': {'case': 'one', 'eps_list': [1e-1, 1e-2, 1e-3, 1e-4]},
    'solve': {'eps_list': [0.2, 0.1, 0.05], 'grid': 32, 'bc': 'affine', 'tresca': False},
    'verify': {},
}


@dataclass
class RunConfig:
    command: str
    params: ModelParams = field(default_factory=ModelParams)
    seed: Optional[int] = None
    out: Optional[str] = None
    jobs: Optional[int] = None
    options: Dict[str, Any] = field(default_factory=dict)
    config: Any = field(default=None, repr=False)

    def get(self, key: str, default: Any = None) -> Any:
        return self.options.get(key, default)

    @classmethod
    def from_dict(cls, command: str, data: Dict[str, Any]) -> 'RunConfig':
        if command not in SCHEMAS:
            raise ConfigError(f"Unknown command {command!r}")
        if not isinstance(data, dict):
            raise ConfigError("Run configuration must be a JSON object")
        schema = {**_COMMON, **SCHEMAS[command]}
        unknown = set(data) - set(schema)
        if unknown:
            raise ConfigError(f"Unknown keys for '{command}': {sorted(unknown)}")
        for group in REQUIRED[command]:
            if not any(key in data for key in group):
                raise ConfigError(f"Missing required key for '{command}': one of {list(group)}")
        if ('a' in data) != ('b' in data):
            raise ConfigError("Rank-one data needs both 'a' and 'b'")

        parsed = {key: schema[key](value) for key, value in data.items()}
        options = dict(DEFAULTS[command])
        options.update({k: v for k, v in parsed.items() if k not in _COMMON})
        params = parsed.get('params', ModelParams())
        if options.get('tresca') or options.get('regime') == 'tresca':
            try:
                params.check_tresca()
            except ValueError as e:
                raise ConfigError(f"Invalid Tresca parameters: {e}") from e
        return cls(
            command=command,
            params=params,
            seed=parsed.get('seed'),
            out=parsed.get('out'),
            jobs=parsed.get('jobs'),
            options=options
        )

    @classmethod
    def from_file(cls, command: str, path: str) -> 'RunConfig':
        if not os.path.exists(path):
            raise ConfigError(f"Config file not found: {path}")
        try:
            with open(path, encoding='utf-8') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file {path} is not valid JSON: {e}") from e
        return cls.from_dict(command, data)
