from dataclasses import dataclass, field
from typing import Dict, Any, List, Optional, Tuple
import enum
import math

import numpy as np

from .params import ModelParams
from .tensors import SymMat


class LaminateCase(enum.Enum):
    ONE = "one"   # biaxial staircase, xi diagonal with xi_1 xi_2 > 0
    TWO = "two"   # rank-one shear, xi = a (.) b


@dataclass(frozen=True, eq=False)
class LaminateSpec:
    case: LaminateCase
    eps: float
    n_layers: int
    params: ModelParams = field(default_factory=ModelParams)
    xi: Optional[SymMat] = None
    a: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, 'case', LaminateCase(self.case))
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if int(self.n_layers) != self.n_layers or self.n_layers < 1:
            raise ValueError(f"n_layers must be a positive integer, got {self.n_layers}")
        object.__setattr__(self, 'n_layers', int(self.n_layers))
        if self.xi is not None and self.xi.dim != 2:
            raise ValueError("Laminates are two-dimensional")
        for name in ('a', 'b'):
            value = getattr(self, name)
            if value is not None:
                value = np.asarray(value, dtype=float)
                if value.shape != (2,):
                    raise ValueError(f"{name} must be a vector of R^2, got shape {value.shape}")
                object.__setattr__(self, name, value)

    @staticmethod
    def default_layers(eps: float) -> int:
        """N_eps = ceil(eps^(-1/2))."""
        return max(1, math.ceil(eps ** -0.5 - 1e-12))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'case': self.case.value,
            'eps': self.eps,
            'n_layers': self.n_layers,
            'xi': self.xi.to_dict() if self.xi else None,
            'a': self.a.tolist() if self.a is not None else None,
            'b': self.b.tolist() if self.b is not None else None
        }


@dataclass(frozen=True)
class BandStrip:
    """One damaged strip, in the coordinate of its profile."""
    direction: str
    center: float
    width: float

    def to_dict(self) -> Dict[str, Any]:
        return {'direction': self.direction, 'center': self.center, 'width': self.width}


@dataclass(frozen=True, eq=False)
class StaircaseProfile:
    """Piecewise-linear staircase on [0, 1]: flat plateaus joined by ramps of
    half-width ``delta`` centred at ``centers``."""
    centers: np.ndarray
    delta: float
    step: float

    @property
    def knots(self) -> np.ndarray:
        inner = np.column_stack([self.centers - self.delta, self.centers + self.delta]).ravel()
        return np.concatenate([[0.0], inner, [1.0]])

    @property
    def values(self) -> np.ndarray:
        n = len(self.centers)
        out = np.zeros(2 * n + 2)
        for i in range(n):
            out[2 * i + 1] = self.step * i
            out[2 * i + 2] = self.step * (i + 1)
        out[-1] = self.step * n
        return out

    @property
    def slope(self) -> float:
        return self.step / (2.0 * self.delta) if self.delta > 0 else 0.0

    def inside(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.delta <= 0 or len(self.centers) == 0:
            return np.zeros(s.shape, dtype=bool)
        return np.any(np.abs(s[..., None] - self.centers) < self.delta, axis=-1)

    def __call__(self, s) -> np.ndarray:
        return np.interp(s, self.knots, self.values)

    def derivative(self, s) -> np.ndarray:
        return np.where(self.inside(s), self.slope, 0.0)

    @property
    def measure(self) -> float:
        return 2.0 * self.delta * len(self.centers)


@dataclass
class LaminateResult:
    case: LaminateCase
    eps: float
    n_layers: int
    delta: Tuple[float, ...]
    energy: float
    damaged_volume: float
    limit_bound: float
    bands: List[BandStrip] = field(default_factory=list)
    slack: float = 0.0

    @property
    def gap(self) -> float:
        return self.energy - self.limit_bound

    def to_dict(self) -> Dict[str, Any]:
        return {
            'case': self.case.value,
            'eps': self.eps,
            'n_layers': self.n_layers,
            'delta': max(self.delta) if self.delta else 0.0,
            'energy': self.energy,
            'damaged_volume': self.damaged_volume,
            'limit_bound': self.limit_bound,
            'gap': self.gap
        }

    def __repr__(self):
        return (f'<LaminateResult {self.case.value} eps={self.eps} N={self.n_layers} '
                f'energy={self.energy:.10g} bound={self.limit_bound:.10g}>')


@dataclass(frozen=True, eq=False)
class JumpSegment:
    """Straight jump segment with jump [u] and unit normal nu."""
    start: np.ndarray
    end: np.ndarray
    jump: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        for name in ('start', 'end', 'jump', 'normal'):
            value = np.asarray(getattr(self, name), dtype=float)
            if value.shape != (2,):
                raise ValueError(f"{name} must be a vector of R^2, got shape {value.shape}")
            object.__setattr__(self, name, value)
        if abs(np.linalg.norm(self.normal) - 1.0) > 1e-12:
            raise ValueError(f"Jump normal must be a unit vector, got {self.normal.tolist()}")

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))
