from dataclasses import dataclass, field
from typing import Dict, Any, Optional, List
import enum

from .tensors import SymMat


class EnvelopeRoute(enum.Enum):
    DUAL = "dual"
    PRIMAL = "primal"
    CLOSED_FORM = "closed-form"


@dataclass
class EnvelopeEval:
    value: float
    theta_opt: float = 0.0
    tau_opt: Optional[SymMat] = None
    route: EnvelopeRoute = EnvelopeRoute.DUAL
    residual: float = 0.0
    multiplier: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta_opt <= 1.0:
            raise ValueError(f"theta_opt must lie in [0,1], got {self.theta_opt}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'value': self.value,
            'theta_opt': self.theta_opt,
            'tau_opt': self.tau_opt.to_dict() if self.tau_opt else None,
            'route': self.route.value,
            'residual': self.residual,
            'multiplier': self.multiplier
        }

    def __repr__(self):
        return f'<EnvelopeEval {self.route.value} value={self.value:.12g} residual={self.residual:.2e}>'


@dataclass
class CharacterizationReport:
    """One-sided checks of W_bar against f and the rank-one slope bound.

    Maximality of W_bar among such minorants is not checked.
    """
    samples: int
    rank_one_samples: int
    f_violations: int = 0
    rank_one_violations: int = 0
    max_f_excess: float = float('-inf')
    max_rank_one_excess: float = float('-inf')
    max_recession_gap: float = 0.0
    worst_inputs: List[Dict[str, Any]] = field(default_factory=list)
    maximality_verified: bool = False

    @property
    def passed(self) -> bool:
        return self.f_violations == 0 and self.rank_one_violations == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'samples': self.samples,
            'rank_one_samples': self.rank_one_samples,
            'f_violations': self.f_violations,
            'rank_one_violations': self.rank_one_violations,
            'max_f_excess': self.max_f_excess,
            'max_rank_one_excess': self.max_rank_one_excess,
            'max_recession_gap': self.max_recession_gap,
            'worst_inputs': self.worst_inputs,
            'maximality_verified': self.maximality_verified,
            'passed': self.passed
        }
