from dataclasses import dataclass, field
from typing import Tuple, Dict, Any
import math

import numpy as np

# Packed order: n=2 -> (11, 22, 12); n=3 -> (11, 22, 33, 12, 13, 23)
_OFFDIAG = {2: ((0, 1),), 3: ((0, 1), (0, 2), (1, 2))}


def packed_size(dim: int) -> int:
    return 3 if dim == 2 else 6


@dataclass(frozen=True)
class SymMat:
    """Symmetric 2x2 or 3x3 matrix in packed upper-triangle storage.

    The Frobenius product doubles the off-diagonal entries; every module
    contracts matrices through ``ddot`` only.
    """
    dim: int
    entries: Tuple[float, ...]

    # numpy scalars defer to __rmul__
    __array_ufunc__ = None

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"SymMat dimension must be 2 or 3, got {self.dim}")
        entries = tuple(float(v) for v in self.entries)
        if len(entries) != packed_size(self.dim):
            raise ValueError(
                f"SymMat of dim {self.dim} needs {packed_size(self.dim)} entries, got {len(entries)}")
        if not all(math.isfinite(v) for v in entries):
            raise ValueError(f"SymMat entries must be finite: {entries}")
        object.__setattr__(self, 'entries', entries)

    @classmethod
    def from_matrix(cls, matrix) -> 'SymMat':
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"Expected a square matrix, got shape {m.shape}")
        n = m.shape[0]
        if n not in (2, 3):
            raise ValueError(f"SymMat dimension must be 2 or 3, got {n}")
        sym = 0.5 * (m + m.T)
        diag = [sym[i, i] for i in range(n)]
        off = [sym[i, j] for i, j in _OFFDIAG[n]]
        return cls(n, tuple(diag + off))

    @classmethod
    def diag(cls, *values) -> 'SymMat':
        n = len(values)
        if n not in (2, 3):
            raise ValueError(f"SymMat dimension must be 2 or 3, got {n}")
        return cls(n, tuple(values) + (0.0,) * (packed_size(n) - n))

    @classmethod
    def zeros(cls, dim: int) -> 'SymMat':
        return cls(dim, (0.0,) * packed_size(dim))

    @classmethod
    def identity(cls, dim: int) -> 'SymMat':
        return cls.diag(*([1.0] * dim))

    def to_matrix(self) -> np.ndarray:
        n = self.dim
        m = np.zeros((n, n))
        for i in range(n):
            m[i, i] = self.entries[i]
        for k, (i, j) in enumerate(_OFFDIAG[n]):
            m[i, j] = m[j, i] = self.entries[n + k]
        return m

    def to_array(self) -> np.ndarray:
        return np.array(self.entries)

    def trace(self) -> float:
        return float(sum(self.entries[:self.dim]))

    def ddot(self, other: 'SymMat') -> float:
        """Frobenius product xi:eta = tr(xi eta)."""
        if other.dim != self.dim:
            raise ValueError(f"Dimension mismatch: {self.dim} vs {other.dim}")
        n = self.dim
        a, b = self.entries, other.entries
        diag = sum(a[i] * b[i] for i in range(n))
        off = sum(a[i] * b[i] for i in range(n, len(a)))
        return float(diag + 2.0 * off)

    def norm(self) -> float:
        return math.sqrt(max(self.ddot(self), 0.0))

    def __add__(self, other: 'SymMat') -> 'SymMat':
        if other.dim != self.dim:
            raise ValueError(f"Dimension mismatch: {self.dim} vs {other.dim}")
        return SymMat(self.dim, tuple(x + y for x, y in zip(self.entries, other.entries)))

    def __sub__(self, other: 'SymMat') -> 'SymMat':
        return self + (-1.0) * other

    def __mul__(self, scalar: float) -> 'SymMat':
        return SymMat(self.dim, tuple(float(scalar) * x for x in self.entries))

    __rmul__ = __mul__

    def __neg__(self) -> 'SymMat':
        return (-1.0) * self

    def to_dict(self) -> Dict[str, Any]:
        return {'dim': self.dim, 'entries': list(self.entries)}

    def __repr__(self):
        return f'<SymMat dim={self.dim} {self.entries}>'


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues and the matching orthonormal frame (columns)."""
    eigenvalues: np.ndarray
    frame: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def compose(self, values) -> SymMat:
        """Matrix with this frame and the given eigenvalues."""
        v = np.asarray(values, dtype=float)
        return SymMat.from_matrix((self.frame * v) @ self.frame.T)

    def reconstruct(self) -> SymMat:
        return self.compose(self.eigenvalues)

    def __repr__(self):
        return f'<Spectrum {np.array2string(self.eigenvalues, precision=6)}>'


@dataclass(frozen=True)
class IsoTensor:
    """Isotropic Hooke tensor C xi = lam tr(xi) Id + 2 mu xi.

    ``strict=False`` builds an effective tensor from coefficient differences
    (e.g. A_s - eta A_w), whose moduli are only checked when it is inverted.
    """
    lam: float
    mu: float
    strict: bool = field(default=True, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.lam) and math.isfinite(self.mu)):
            raise ValueError(f"Lame coefficients must be finite: ({self.lam}, {self.mu})")
        if self.strict and (self.lam <= 0 or self.mu <= 0):
            raise ValueError(f"Lame coefficients must be positive: ({self.lam}, {self.mu})")

    @classmethod
    def effective(cls, lam: float, mu: float) -> 'IsoTensor':
        return cls(float(lam), float(mu), strict=False)

    def minus(self, other: 'IsoTensor', weight: float = 1.0) -> 'IsoTensor':
        return IsoTensor.effective(self.lam - weight * other.lam, self.mu - weight * other.mu)

    def scaled(self, factor: float) -> 'IsoTensor':
        return IsoTensor.effective(factor * self.lam, factor * self.mu)

    def is_invertible(self, dim: int, tol: float = 0.0) -> bool:
        return self.mu > tol and dim * self.lam + 2.0 * self.mu > tol

    def to_dict(self) -> Dict[str, Any]:
        return {'lambda': self.lam, 'mu': self.mu}

    def __repr__(self):
        return f'<IsoTensor lambda={self.lam} mu={self.mu}>'
