from dataclasses import dataclass, field
from typing import Dict, Any, List, Optional, Tuple
import enum

import numpy as np
import pandas as pd

from .params import Regime
from .tensors import SymMat


class BoundaryKind(enum.Enum):
    AFFINE = "affine"     # Dirichlet data on the whole boundary
    LATERAL = "lateral"   # Dirichlet data on x = 0 and x = L only


class InitKind(enum.Enum):
    UNDAMAGED = "undamaged"
    RANDOM = "random"
    LAMINATE = "laminate"
    FRAME = "frame"


@dataclass(frozen=True, eq=False)
class BoundaryCondition:
    """u = xi x + shift + omega (-y, x) on the constrained part of the boundary."""
    xi: SymMat
    kind: BoundaryKind = BoundaryKind.AFFINE
    shift: Tuple[float, float] = (0.0, 0.0)
    omega: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'kind', BoundaryKind(self.kind))
        if self.xi.dim != 2:
            raise ValueError("The grid solver is two-dimensional")

    def values(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        u = points @ self.xi.to_matrix().T + np.asarray(self.shift, dtype=float)
        rotation = self.omega * np.column_stack([-points[:, 1], points[:, 0]])
        return u + rotation

    def to_dict(self) -> Dict[str, Any]:
        return {'xi': self.xi.to_dict(), 'kind': self.kind.value,
                'shift': list(self.shift), 'omega': self.omega}


@dataclass
class GridState:
    """Displacement and per-cell damage on an nx x ny grid of square cells."""
    nx: int
    ny: int
    h: float
    bc: BoundaryCondition
    displacement: Optional[np.ndarray] = None
    damage: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1 or not self.h > 0:
            raise ValueError(f"Invalid grid {self.nx}x{self.ny} with h={self.h}")
        if self.displacement is None:
            self.displacement = self.bc.values(self.node_coords())
        if self.damage is None:
            self.damage = np.zeros(self.n_cells, dtype=np.int8)
        self.damage = np.asarray(self.damage, dtype=np.int8)
        if self.damage.shape != (self.n_cells,) or np.any((self.damage != 0) & (self.damage != 1)):
            raise ValueError("Damage must be a {0,1} array with one entry per cell")

    @classmethod
    def unit_square(cls, n: int, bc: BoundaryCondition) -> 'GridState':
        return cls(n, n, 1.0 / n, bc)

    @property
    def n_nodes(self) -> int:
        return (self.nx + 1) * (self.ny + 1)

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def area(self) -> float:
        return self.nx * self.ny * self.h ** 2

    @property
    def cell_area(self) -> float:
        return self.h ** 2

    def node_coords(self) -> np.ndarray:
        i, j = np.meshgrid(np.arange(self.nx + 1), np.arange(self.ny + 1), indexing='xy')
        return self.h * np.column_stack([i.ravel(), j.ravel()]).astype(float)

    def cell_centers(self) -> np.ndarray:
        i, j = np.meshgrid(np.arange(self.nx), np.arange(self.ny), indexing='xy')
        return self.h * (np.column_stack([i.ravel(), j.ravel()]) + 0.5)

    def constrained_nodes(self) -> np.ndarray:
        coords = self.node_coords()
        width, height = self.nx * self.h, self.ny * self.h
        tol = 1e-12 * self.h
        lateral = (np.abs(coords[:, 0]) < tol) | (np.abs(coords[:, 0] - width) < tol)
        if self.bc.kind is BoundaryKind.LATERAL:
            return lateral
        return lateral | (np.abs(coords[:, 1]) < tol) | (np.abs(coords[:, 1] - height) < tol)

    def damaged_volume(self) -> float:
        return float(self.damage.sum()) * self.cell_area

    def copy(self) -> 'GridState':
        return GridState(self.nx, self.ny, self.h, self.bc,
                         self.displacement.copy(), self.damage.copy())

    def damage_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'cell': np.arange(self.n_cells), 'chi': self.damage.astype(int)})


@dataclass
class AlternationResult:
    state: GridState
    trace: List[float]
    converged: bool
    cap_hit: bool
    cg_iterations: int = 0
    seed: Optional[str] = None

    @property
    def energy(self) -> float:
        return min(self.trace) if self.trace else float('nan')

    @property
    def iterations(self) -> int:
        return len(self.trace)


@dataclass
class RegimeReport:
    regime: Regime
    eps_list: List[float]
    etas: List[float]
    energies: List[float]
    damaged_volumes: List[float]
    iterations: List[int]
    limit_reference: float
    scaling_fit: Optional[float] = None
    concentration_constant: Optional[float] = None
    envelope_reference: List[float] = field(default_factory=list)
    flags: List[str] = field(default_factory=list)
    envelope_ratios: List[float] = field(default_factory=list)
    within_bracket: Optional[bool] = None
    seeds: List[str] = field(default_factory=list)
    model: str = "damage"
    states: List[GridState] = field(default_factory=list, repr=False)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'eps': self.eps_list,
            'eta': self.etas,
            'iters': self.iterations,
            'energy': self.energies,
            'damaged_volume': self.damaged_volumes,
            'limit_reference': [self.limit_reference] * len(self.eps_list)
        })

    def to_dict(self) -> Dict[str, Any]:
        return {
            'regime': self.regime.value,
            'model': self.model,
            'eps_list': self.eps_list,
            'energies': self.energies,
            'damaged_volumes': self.damaged_volumes,
            'limit_reference': self.limit_reference,
            'scaling_fit': self.scaling_fit,
            'concentration_constant': self.concentration_constant,
            'envelope_reference': self.envelope_reference,
            'flags': self.flags,
            'envelope_ratios': self.envelope_ratios,
            'within_bracket': self.within_bracket,
            'seeds': self.seeds
        }
