"""Spectral and tensor algebra on 2x2 / 3x3 symmetric matrices.

Eigenvalues come back ascending.  The 3x3 solver uses the trigonometric
formula and switches to cyclic Jacobi rotations when two eigenvalues are
close enough for the cross-product eigenvectors to lose accuracy.
"""
import logging
import math
from typing import Tuple

import numpy as np

from brittle_limit.config import Config
from brittle_limit.models.errors import NonInvertibleError
from brittle_limit.models.tensors import SymMat, Spectrum, IsoTensor

logger = logging.getLogger(__name__)


def eigs(xi: SymMat) -> Spectrum:
    """Ascending eigenvalues and orthonormal eigenframe of ``xi``."""
    m = xi.to_matrix()
    if xi.dim == 2:
        values, frame = _eigs_2x2(m)
    else:
        values, frame = _eigs_3x3(m)
    order = np.argsort(values, kind='stable')
    return Spectrum(values[order], frame[:, order])


def eigvals(xi: SymMat) -> np.ndarray:
    return eigs(xi).eigenvalues


def _eigs_2x2(m: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    a, b, c = m[0, 0], m[1, 1], m[0, 1]
    mean = 0.5 * (a + b)
    half_diff = 0.5 * (a - b)
    radius = math.hypot(half_diff, c)
    phi = 0.5 * math.atan2(c, half_diff)
    v_max = np.array([math.cos(phi), math.sin(phi)])
    v_min = np.array([-math.sin(phi), math.cos(phi)])
    return np.array([mean - radius, mean + radius]), np.column_stack([v_min, v_max])


def _eigs_3x3(m: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    q = np.trace(m) / 3.0
    b = m - q * np.eye(3)
    p = math.sqrt(max(np.sum(b * b) / 6.0, 0.0))
    scale = max(abs(q), np.abs(m).max(), 1e-300)
    if p <= Config.EIG_DEGENERATE_FLOOR * scale:
        return np.full(3, q), np.eye(3)

    r = float(np.clip(np.linalg.det(b / p) / 2.0, -1.0, 1.0))
    if 1.0 - r * r < Config.EIG_JACOBI_THRESHOLD:
        logger.debug(f"Near-degenerate spectrum (r={r}), using Jacobi rotations")
        return _jacobi(m)

    phi = math.acos(r) / 3.0
    lam_max = q + 2.0 * p * math.cos(phi)
    lam_min = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    lam_mid = 3.0 * q - lam_max - lam_min

    v_min = _null_vector(m - lam_min * np.eye(3))
    v_max = _null_vector(m - lam_max * np.eye(3))
    # Gram-Schmidt against the first vector, then complete the frame
    v_max = v_max - (v_max @ v_min) * v_min
    v_max /= np.linalg.norm(v_max)
    v_mid = np.cross(v_max, v_min)
    return np.array([lam_min, lam_mid, lam_max]), np.column_stack([v_min, v_mid, v_max])


def _null_vector(shifted: np.ndarray) -> np.ndarray:
    rows = shifted
    candidates = [np.cross(rows[0], rows[1]), np.cross(rows[0], rows[2]), np.cross(rows[1], rows[2])]
    norms = [np.linalg.norm(c) for c in candidates]
    best = int(np.argmax(norms))
    return candidates[best] / norms[best]


def _jacobi(m: np.ndarray, max_sweeps: int = 50) -> Tuple[np.ndarray, np.ndarray]:
    a = m.astype(float).copy()
    v = np.eye(3)
    scale = np.sum(a * a)
    for _ in range(max_sweeps):
        off = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
        if off <= 1e-32 * scale or off == 0.0:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            if a[p, q] == 0.0:
                continue
            theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
            t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            rot = np.eye(3)
            rot[p, p] = rot[q, q] = c
            rot[p, q] = s
            rot[q, p] = -s
            a = rot.T @ a @ rot
            v = v @ rot
    return np.diag(a).copy(), v


def sym_outer(a, b) -> SymMat:
    """Symmetric tensor product a (.) b = (a (x) b + b (x) a) / 2."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"sym_outer needs two vectors of equal length, got {a.shape} and {b.shape}")
    outer = np.outer(a, b)
    return SymMat.from_matrix(0.5 * (outer + outer.T))


def cofactor(xi: SymMat) -> SymMat:
    if xi.dim != 3:
        raise ValueError("cofactor is defined for 3x3 matrices; use the determinant in 2-D")
    m = xi.to_matrix()
    c = np.empty((3, 3))
    c[0, 0] = m[1, 1] * m[2, 2] - m[1, 2] ** 2
    c[1, 1] = m[0, 0] * m[2, 2] - m[0, 2] ** 2
    c[2, 2] = m[0, 0] * m[1, 1] - m[0, 1] ** 2
    c[0, 1] = c[1, 0] = m[0, 2] * m[1, 2] - m[0, 1] * m[2, 2]
    c[0, 2] = c[2, 0] = m[0, 1] * m[1, 2] - m[0, 2] * m[1, 1]
    c[1, 2] = c[2, 1] = m[0, 1] * m[0, 2] - m[0, 0] * m[1, 2]
    return SymMat.from_matrix(c)


def determinant(xi: SymMat) -> float:
    return float(np.linalg.det(xi.to_matrix()))


def dev_split(xi: SymMat) -> Tuple[float, SymMat]:
    """Return (tr xi, xi_D) with xi = xi_D + (tr xi / n) Id."""
    trace = xi.trace()
    return trace, xi - (trace / xi.dim) * SymMat.identity(xi.dim)


def is_deviatoric(xi: SymMat, tol: float = None) -> bool:
    tol = Config.DEVIATORIC_TOL if tol is None else tol
    return abs(xi.trace()) <= tol * (1.0 + xi.norm())


def apply_iso(C: IsoTensor, xi: SymMat) -> SymMat:
    return (C.lam * xi.trace()) * SymMat.identity(xi.dim) + (2.0 * C.mu) * xi


def iso_quad(C: IsoTensor, xi: SymMat) -> float:
    return C.lam * xi.trace() ** 2 + 2.0 * C.mu * xi.ddot(xi)


def iso_inverse_apply(C: IsoTensor, tau: SymMat) -> SymMat:
    n = tau.dim
    if not C.is_invertible(n):
        raise NonInvertibleError(f"Isotropic tensor {C} is not invertible in dimension {n}")
    trace, tau_d = dev_split(tau)
    return (trace / (n * (n * C.lam + 2.0 * C.mu))) * SymMat.identity(n) + (1.0 / (2.0 * C.mu)) * tau_d


def iso_quad_eig(lam: float, mu: float, values: np.ndarray) -> np.ndarray:
    """lam (sum v)^2 + 2 mu |v|^2 over the last axis of eigenvalue arrays."""
    values = np.asarray(values, dtype=float)
    return lam * values.sum(axis=-1) ** 2 + 2.0 * mu * np.sum(values * values, axis=-1)


def iso_inverse_quad_matrix(C: IsoTensor, n: int) -> np.ndarray:
    """Matrix Q with C^{-1} t : t = t^T Q t for t diagonal in a common frame."""
    if not C.is_invertible(n):
        raise NonInvertibleError(f"Isotropic tensor {C} is not invertible in dimension {n}")
    bulk = 1.0 / (n * (n * C.lam + 2.0 * C.mu))
    shear = 1.0 / (2.0 * C.mu)
    return shear * np.eye(n) + (bulk - shear / n) * np.ones((n, n))


def rank_one_factor(xi: SymMat, tol: float = 1e-12) -> Tuple[np.ndarray, np.ndarray]:
    """Vectors (a, b) with xi = a (.) b, when xi has at most two nonzero
    eigenvalues of opposite sign."""
    spectrum = eigs(xi)
    values = spectrum.eigenvalues
    band = tol * max(1.0, float(np.abs(values).max()))
    lo, hi = values[0], values[-1]
    inner = values[1:-1]
    if lo > band or hi < -band or np.any(np.abs(inner) > band):
        raise ValueError(f"Matrix with eigenvalues {values.tolist()} is not a symmetric rank-one product")
    pos = math.sqrt(max(hi, 0.0))
    neg = math.sqrt(max(-lo, 0.0))
    v_lo, v_hi = spectrum.frame[:, 0], spectrum.frame[:, -1]
    return pos * v_hi + neg * v_lo, pos * v_hi - neg * v_lo


def random_rotation(n: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def rotate(xi: SymMat, rotation: np.ndarray) -> SymMat:
    return SymMat.from_matrix(rotation @ xi.to_matrix() @ rotation.T)


def random_symmat(n: int, rng: np.random.Generator, scale: float = 1.0) -> SymMat:
    return SymMat(n, tuple(scale * rng.standard_normal(3 if n == 2 else 6)))


def fibonacci_sphere(count: int) -> np.ndarray:
    """``count`` nearly uniform unit vectors in R^3 (rows)."""
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    radius = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = np.arange(count) * math.pi * (3.0 - math.sqrt(5.0))
    return np.column_stack([radius * np.cos(phi), radius * np.sin(phi), z])
