from dataclasses import dataclass, field
from typing import Dict, Any, Optional, Tuple
import enum
import math

import numpy as np

from .tensors import IsoTensor, SymMat


class EtaKind(enum.Enum):
    HENCKY = "hencky"      # eta = alpha * eps
    TRIVIAL = "trivial"    # eta = eps**p, p > 1
    ELASTIC = "elastic"    # eta = eps**q, 0 < q < 1


class Regime(enum.Enum):
    TRIVIAL = "trivial"
    HENCKY = "hencky"
    ELASTIC = "elastic"
    TRESCA = "tresca"


_DEFAULT_EXPONENTS = {EtaKind.TRIVIAL: 2.0, EtaKind.ELASTIC: 0.5}


@dataclass(frozen=True)
class EtaSchedule:
    kind: EtaKind = EtaKind.HENCKY
    exponent: Optional[float] = None

    def __post_init__(self):
        kind = EtaKind(self.kind)
        object.__setattr__(self, 'kind', kind)
        if kind is EtaKind.HENCKY:
            object.__setattr__(self, 'exponent', None)
            return
        p = _DEFAULT_EXPONENTS[kind] if self.exponent is None else float(self.exponent)
        if kind is EtaKind.TRIVIAL and not p > 1.0:
            raise ValueError(f"Trivial schedule needs exponent > 1, got {p}")
        if kind is EtaKind.ELASTIC and not 0.0 < p < 1.0:
            raise ValueError(f"Elastic schedule needs exponent in (0,1), got {p}")
        object.__setattr__(self, 'exponent', p)

    def eta(self, eps: float, alpha: float) -> float:
        if eps <= 0:
            raise ValueError(f"eps must be positive, got {eps}")
        if self.kind is EtaKind.HENCKY:
            return alpha * eps
        return eps ** self.exponent

    @property
    def regime(self) -> Regime:
        return Regime(self.kind.value)

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': self.kind.value, 'exponent': self.exponent}


@dataclass(frozen=True)
class ModelParams:
    """Material and scaling constants of the damage model."""
    lambda_w: float = 1.0
    mu_w: float = 1.0
    lambda_s: float = 1.0
    mu_s: float = 1.0
    kappa: float = 1.0
    alpha: float = 1.0
    eta_schedule: EtaSchedule = field(default_factory=EtaSchedule)

    def __post_init__(self):
        for name in ('lambda_w', 'mu_w', 'lambda_s', 'mu_s', 'kappa'):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value}")
            object.__setattr__(self, name, value)
        alpha = float(self.alpha)
        if not (math.isfinite(alpha) and alpha > 0):
            raise ValueError(f"alpha must lie in (0, inf), got {alpha}")
        object.__setattr__(self, 'alpha', alpha)

    @property
    def A_w(self) -> IsoTensor:
        return IsoTensor(self.lambda_w, self.mu_w)

    @property
    def A_s(self) -> IsoTensor:
        return IsoTensor(self.lambda_s, self.mu_s)

    @property
    def regime(self) -> Regime:
        return self.eta_schedule.regime

    def eta(self, eps: float) -> float:
        return self.eta_schedule.eta(eps, self.alpha)

    def weak_tensor(self, eps: float, tresca: bool = False) -> IsoTensor:
        """eta_eps A_w, or the Tresca weak tensor (lambda_w, eps mu_w)."""
        if tresca:
            return IsoTensor.effective(self.lambda_w, eps * self.mu_w)
        return self.A_w.scaled(self.eta(eps))

    def check_tresca(self):
        if self.lambda_w > self.lambda_s:
            raise ValueError(
                f"Tresca model requires lambda_w <= lambda_s, got {self.lambda_w} > {self.lambda_s}")

    def with_schedule(self, schedule: EtaSchedule) -> 'ModelParams':
        return ModelParams(self.lambda_w, self.mu_w, self.lambda_s, self.mu_s,
                           self.kappa, self.alpha, schedule)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'lambda_w': self.lambda_w,
            'mu_w': self.mu_w,
            'lambda_s': self.lambda_s,
            'mu_s': self.mu_s,
            'kappa': self.kappa,
            'alpha': self.alpha,
            'eta_schedule': self.eta_schedule.to_dict()
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ModelParams':
        data = dict(data)
        schedule = data.pop('eta_schedule', None)
        if isinstance(schedule, dict):
            schedule = EtaSchedule(schedule.get('kind', 'hencky'), schedule.get('exponent'))
        elif schedule is None:
            schedule = EtaSchedule()
        return cls(eta_schedule=schedule, **data)

    def __repr__(self):
        return (f'<ModelParams w=({self.lambda_w}, {self.mu_w}) s=({self.lambda_s}, {self.mu_s}) '
                f'kappa={self.kappa} alpha={self.alpha} {self.eta_schedule.kind.value}>')


class ConvMKind(enum.Enum):
    IDENTITY = "identity"
    RANK_ONE = "rank_one"


@dataclass(frozen=True, eq=False)
class ConvMPoint:
    """A point of M = {Id} U {y (x) y : |y| = 1} in R^{3x3}_sym."""
    kind: ConvMKind
    y: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind is ConvMKind.RANK_ONE:
            y = np.asarray(self.y, dtype=float)
            if y.shape != (3,) or abs(np.linalg.norm(y) - 1.0) > 1e-12:
                raise ValueError(f"Rank-one point needs a unit vector in R^3, got {self.y}")
            object.__setattr__(self, 'y', y)

    @classmethod
    def identity(cls) -> 'ConvMPoint':
        return cls(ConvMKind.IDENTITY)

    @classmethod
    def rank_one(cls, y) -> 'ConvMPoint':
        y = np.asarray(y, dtype=float)
        return cls(ConvMKind.RANK_ONE, y / np.linalg.norm(y))

    def matrix(self) -> np.ndarray:
        if self.kind is ConvMKind.IDENTITY:
            return np.eye(3)
        return np.outer(self.y, self.y)


@dataclass(frozen=True, eq=False)
class ConvMElement:
    """Finite convex combination of points of M."""
    terms: Tuple[Tuple[float, ConvMPoint], ...]

    def __post_init__(self):
        terms = tuple((float(w), p) for w, p in self.terms)
        if not terms:
            raise ValueError("ConvMElement needs at least one term")
        weights = np.array([w for w, _ in terms])
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"Weights must be nonnegative and sum to 1, got {weights.tolist()}")
        object.__setattr__(self, 'terms', terms)

    @classmethod
    def of(cls, point: ConvMPoint) -> 'ConvMElement':
        return cls(((1.0, point),))

    def matrix(self) -> SymMat:
        return SymMat.from_matrix(sum(w * p.matrix() for w, p in self.terms))
