"""Exact maximization of concave spectral quadratics with a piecewise penalty.

Problems have the form

    max_t  t.x - 1/2 t^T Q t - c G(t)          (penalized)
    max_t  t.x - 1/2 t^T Q t  s.t. G(t) <= L   (constrained)

where t are the eigenvalues of a stress commuting with the strain whose
ascending eigenvalues are x, Q is permutation invariant, and G depends only
on (min t, max t) through quadratic branches.  The maximizer is sorted like
x, so candidates are enumerated over contiguous tie groups and penalty
branches; each candidate is a single linear solve (plus a scalar root for the
multiplier in the constrained case).
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple

import numpy as np
from scipy.optimize import brentq

from brittle_limit.models.errors import InfeasibleBranchError

logger = logging.getLogger(__name__)

_ACCEPT_TOL = 1e-12
_FEASIBILITY_TOL = 1e-9


@lru_cache(maxsize=None)
def tie_patterns(n: int) -> Tuple[Tuple[Tuple[int, ...], ...], ...]:
    """Compositions of range(n) into contiguous groups."""
    if n == 1:
        return (((0,),),)
    patterns = []
    for rest in tie_patterns(n - 1):
        patterns.append(((0,),) + tuple(tuple(i + 1 for i in g) for g in rest))
        patterns.append(((0,) + tuple(i + 1 for i in rest[0]),) + tuple(tuple(i + 1 for i in g) for g in rest[1:]))
    return tuple(patterns)


@dataclass
class _Pattern:
    P: np.ndarray   # n x k group indicator
    E: np.ndarray   # k x 2 picks (s_first, s_last)


@lru_cache(maxsize=None)
def _patterns(n: int) -> Tuple[_Pattern, ...]:
    out = []
    for groups in tie_patterns(n):
        k = len(groups)
        P = np.zeros((n, k))
        for j, g in enumerate(groups):
            P[list(g), j] = 1.0
        E = np.zeros((k, 2))
        E[0, 0] = 1.0
        E[k - 1, 1] = 1.0
        out.append(_Pattern(P, E))
    return tuple(out)


@dataclass
class SpectralMax:
    value: float
    t: np.ndarray
    multiplier: float = 0.0


def _objective(x, Q, t):
    return t @ x - 0.5 * np.einsum('...i,ij,...j->...', t, Q, t)


def _accepted(s, branch, scale):
    tol = _ACCEPT_TOL * scale
    ordered = np.all(np.diff(s, axis=-1) >= -tol, axis=-1)
    return ordered & branch.region(s[..., 0], s[..., -1], tol)


def maximize_penalized(x, Q, penalty, c) -> Tuple[np.ndarray, np.ndarray]:
    """Penalized maximum for every penalty weight in ``c``.

    Returns (values, t) with shapes (m,) and (m, n).
    """
    x = np.asarray(x, dtype=float)
    cs = np.atleast_1d(np.asarray(c, dtype=float))
    if np.any(cs < 0):
        raise ValueError("penalty weights must be nonnegative")
    n = len(x)
    best_value = np.full(len(cs), -np.inf)
    best_t = np.zeros((len(cs), n))
    scale = 1.0 + np.abs(x).max() * max(1.0, np.abs(np.linalg.inv(Q)).max())

    for pattern in _patterns(n):
        A = pattern.P.T @ Q @ pattern.P
        r = pattern.P.T @ x
        for branch in penalty.branches:
            M = pattern.E @ branch.form @ pattern.E.T
            systems = A[None, :, :] + 2.0 * cs[:, None, None] * M[None, :, :]
            rhs = np.broadcast_to(r, (len(cs), len(r)))[..., None]
            s = np.linalg.solve(systems, rhs)[..., 0]
            ok = _accepted(s, branch, scale)
            if not np.any(ok):
                continue
            t = s @ pattern.P.T
            value = _objective(x, Q, t) - cs * penalty(t[:, 0], t[:, -1])
            better = ok & (value > best_value)
            best_value = np.where(better, value, best_value)
            best_t[better] = t[better]

    if not np.all(np.isfinite(best_value)):
        raise InfeasibleBranchError(f"No admissible branch candidate for x={x.tolist()}")
    return best_value, best_t


def maximize_constrained(x, Q, penalty, level: float) -> SpectralMax:
    """max t.x - 1/2 t^T Q t over G(t) <= level, with its KKT multiplier.

    The multiplier is scaled so that the Lagrangian is
    t.x - 1/2 t^T Q t - (multiplier / 2) (G(t) - level).
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    t0 = np.linalg.solve(Q, x)
    if penalty(t0[0], t0[-1]) <= level * (1.0 + _ACCEPT_TOL):
        return SpectralMax(float(_objective(x, Q, t0)), t0, 0.0)

    scale = 1.0 + np.abs(t0).max()
    best = None
    for pattern in _patterns(n):
        A = pattern.P.T @ Q @ pattern.P
        r = pattern.P.T @ x
        for branch in penalty.branches:
            M = pattern.E @ branch.form @ pattern.E.T

            def solve(lam):
                return np.linalg.solve(A + lam * M, r)

            def excess(lam):
                s = solve(lam)
                return float(s @ M @ s) - level

            if excess(0.0) <= 0.0:
                lam = 0.0
            else:
                hi = 1.0
                for _ in range(400):
                    if excess(hi) < 0.0:
                        break
                    hi *= 2.0
                else:
                    continue
                lam = brentq(excess, 0.0, hi, xtol=1e-14 * hi, rtol=1e-15, maxiter=500)

            s = solve(lam)
            if not _accepted(s[None, :], branch, scale)[0]:
                continue
            t = pattern.P @ s
            if penalty(t[0], t[-1]) > level * (1.0 + _FEASIBILITY_TOL):
                continue
            value = float(_objective(x, Q, t))
            if best is None or value > best.value:
                best = SpectralMax(value, t, float(lam))

    if best is None:
        raise InfeasibleBranchError(f"No feasible KKT candidate for x={x.tolist()} at level {level}")
    return best


def lagrangian_dual(x, Q, penalty, level: float, multiplier: float) -> float:
    """Dual function at ``multiplier``; equals the constrained max at the KKT point."""
    value, _ = maximize_penalized(x, Q, penalty, 0.5 * multiplier)
    return float(value[0]) + 0.5 * multiplier * level
