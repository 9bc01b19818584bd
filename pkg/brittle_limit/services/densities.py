"""Closed-form energy densities, constraint sets and quadratic forms.

Spectral quantities (G, h and their Tresca counterparts) are written once
over eigenvalue arrays so the envelope solvers and the oracles can evaluate
them on whole grids; the SymMat entry points below wrap those kernels.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from brittle_limit.config import Config
from brittle_limit.models.params import ModelParams, ConvMElement, ConvMPoint
from brittle_limit.models.tensors import SymMat
from brittle_limit.services import symcalc

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PenaltyBranch:
    """One quadratic piece of a spectral penalty in (t_min, t_max).

    ``form`` is the 2x2 matrix of the piece; ``region`` tells, with a
    tolerance, whether a point lies in the closure of the piece's domain.
    """
    name: str
    form: np.ndarray
    region: Callable[[np.ndarray, np.ndarray, float], np.ndarray]


class LamePenalty:
    """The piecewise quadratic G attached to a Lame pair (lam, mu).

    With beta = (lam + 2 mu) / (2 (lam + mu)) and m = beta (t_min + t_max):
    m < t_min uses t_min^2 / (lam + 2 mu), t_max < m uses t_max^2 / (lam + 2 mu),
    and everything else, boundaries included, uses the middle branch.
    """

    def __init__(self, lam: float, mu: float):
        if not (lam > 0 and mu > 0):
            raise ValueError(f"Penalty moduli must be positive, got ({lam}, {mu})")
        self.lam = float(lam)
        self.mu = float(mu)
        self.beta = (lam + 2.0 * mu) / (2.0 * (lam + mu))
        axial = 1.0 / (lam + 2.0 * mu)
        a = 1.0 / (4.0 * mu)
        b = 1.0 / (4.0 * (lam + mu))
        beta = self.beta

        def lower(t1, tn, tol):
            return beta * (t1 + tn) <= t1 + tol

        def middle(t1, tn, tol):
            m = beta * (t1 + tn)
            return (t1 - tol <= m) & (m <= tn + tol)

        def upper(t1, tn, tol):
            return tn <= beta * (t1 + tn) + tol

        self.branches: List[PenaltyBranch] = [
            PenaltyBranch('lower', np.array([[axial, 0.0], [0.0, 0.0]]), lower),
            PenaltyBranch('middle', np.array([[a + b, b - a], [b - a, a + b]]), middle),
            PenaltyBranch('upper', np.array([[0.0, 0.0], [0.0, axial]]), upper),
        ]

    def branch_index(self, t_min, t_max) -> np.ndarray:
        t_min = np.asarray(t_min, dtype=float)
        t_max = np.asarray(t_max, dtype=float)
        m = self.beta * (t_min + t_max)
        index = np.ones(np.broadcast(t_min, t_max).shape, dtype=int)
        index = np.where(m < t_min, 0, index)
        return np.where(t_max < m, 2, index)

    def __call__(self, t_min, t_max) -> np.ndarray:
        t_min = np.asarray(t_min, dtype=float)
        t_max = np.asarray(t_max, dtype=float)
        axial = 1.0 / (self.lam + 2.0 * self.mu)
        middle = (t_min - t_max) ** 2 / (4.0 * self.mu) + (t_min + t_max) ** 2 / (4.0 * (self.lam + self.mu))
        index = self.branch_index(t_min, t_max)
        return np.where(index == 0, t_min ** 2 * axial, np.where(index == 2, t_max ** 2 * axial, middle))


class TrescaPenalty:
    """G~(tau) = (t_max - t_min)^2 / (4 mu_w), a single quadratic piece."""

    def __init__(self, mu: float):
        if not mu > 0:
            raise ValueError(f"Penalty modulus must be positive, got {mu}")
        self.mu = float(mu)
        a = 1.0 / (4.0 * mu)
        self.branches: List[PenaltyBranch] = [
            PenaltyBranch('spread', np.array([[a, -a], [-a, a]]),
                          lambda t1, tn, tol: np.ones(np.broadcast(t1, tn).shape, dtype=bool)),
        ]

    def __call__(self, t_min, t_max) -> np.ndarray:
        return (np.asarray(t_max, dtype=float) - np.asarray(t_min, dtype=float)) ** 2 / (4.0 * self.mu)


def _sorted(values) -> np.ndarray:
    return np.sort(np.asarray(values, dtype=float), axis=-1)


# ---------------------------------------------------------------------------
# Eigenvalue kernels (vectorized over leading axes)

def h_eig(lam: float, mu: float, values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return mu * np.abs(values).sum(axis=-1) ** 2 + (lam + mu) * values.sum(axis=-1) ** 2


def h_tilde_eig(mu: float, values) -> np.ndarray:
    return mu * np.abs(np.asarray(values, dtype=float)).sum(axis=-1) ** 2


def G_eig(params: ModelParams, values) -> np.ndarray:
    s = _sorted(values)
    return LamePenalty(params.lambda_w, params.mu_w)(s[..., 0], s[..., -1])


# ---------------------------------------------------------------------------
# SymMat entry points

def f_strong(params: ModelParams, xi: SymMat) -> float:
    return 0.5 * symcalc.iso_quad(params.A_s, xi)


def g_weak(params: ModelParams, eps: float, xi: SymMat) -> float:
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return 0.5 * params.eta(eps) * symcalc.iso_quad(params.A_w, xi) + params.kappa / eps


def w_eps(params: ModelParams, eps: float, xi: SymMat) -> float:
    return min(f_strong(params, xi), g_weak(params, eps, xi))


def G_quad(params: ModelParams, tau: SymMat) -> float:
    return float(G_eig(params, symcalc.eigvals(tau)))


def h_density(params: ModelParams, xi: SymMat) -> float:
    return float(h_eig(params.lambda_w, params.mu_w, symcalc.eigvals(xi)))


def h_r(params: ModelParams, r: float, xi: SymMat) -> float:
    if xi.dim != 2:
        raise ValueError("h_r is the two-dimensional family")
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"r must lie in [0,1], got {r}")
    return symcalc.iso_quad(params.A_w, xi) + 4.0 * params.mu_w * r * symcalc.determinant(xi)


def h_A(params: ModelParams, A: ConvMElement, xi: SymMat) -> float:
    if xi.dim != 3:
        raise ValueError("h_A is the three-dimensional family")
    return symcalc.iso_quad(params.A_w, xi) + 4.0 * params.mu_w * A.matrix().ddot(symcalc.cofactor(xi))


def h_cofactor_form(params: ModelParams, xi: SymMat) -> float:
    """A_w xi:xi + 4 mu_w times the positive parts of the pairwise eigenvalue products."""
    v = symcalc.eigvals(xi)
    pairs = [v[i] * v[j] for i in range(len(v)) for j in range(i + 1, len(v))]
    return symcalc.iso_quad(params.A_w, xi) + 4.0 * params.mu_w * sum(max(p, 0.0) for p in pairs)


def maximizing_conv_m(params: ModelParams, xi: SymMat) -> ConvMElement:
    """Point of M where h_A attains h: Id when tr cof dominates, else y (x) y."""
    if xi.dim != 3:
        raise ValueError("conv(M) lives in three dimensions")
    cof = symcalc.eigs(symcalc.cofactor(xi))
    if cof.eigenvalues.sum() >= cof.eigenvalues[-1]:
        return ConvMElement.of(ConvMPoint.identity())
    return ConvMElement.of(ConvMPoint.rank_one(cof.frame[:, -1]))


def conv_m_samples(count: Optional[int] = None) -> List[ConvMPoint]:
    count = Config.CONV_M_SAMPLES if count is None else count
    return [ConvMPoint.identity()] + [ConvMPoint.rank_one(y) for y in symcalc.fibonacci_sphere(count)]


def max_h_A_sampled(params: ModelParams, xi: SymMat, count: Optional[int] = None) -> float:
    """Sup of h_A over sampled points of M (the sup over conv(M) is attained on M)."""
    if xi.dim != 3:
        raise ValueError("conv(M) lives in three dimensions")
    count = Config.CONV_M_SAMPLES if count is None else count
    cof = symcalc.cofactor(xi).to_matrix()
    ys = symcalc.fibonacci_sphere(count)
    rank_one = np.einsum('ki,ij,kj->k', ys, cof, ys)
    best = max(float(np.trace(cof)), float(rank_one.max()))
    return symcalc.iso_quad(params.A_w, xi) + 4.0 * params.mu_w * best


def in_K(params: ModelParams, tau: SymMat, tol: Optional[float] = None) -> bool:
    tol = Config.IN_K_TOL if tol is None else tol
    return G_quad(params, tau) <= 2.0 * params.alpha * params.kappa * (1.0 + tol)


def support_K(params: ModelParams, xi: SymMat) -> float:
    return math.sqrt(2.0 * params.alpha * params.kappa * h_density(params, xi))


def density_kink(params: ModelParams, xi: SymMat) -> float:
    """Ray parameter t* where A_s(t xi) leaves K, i.e. where W_bar stops being f."""
    g = G_quad(params, symcalc.apply_iso(params.A_s, xi))
    if g <= 0.0:
        return math.inf
    return math.sqrt(2.0 * params.alpha * params.kappa / g)


def coercivity_constant(params: ModelParams, eps: float) -> float:
    """c > 0 with W_eps(xi) >= c |xi| - 1/c for every xi."""
    quadratic = params.mu_s  # f >= (2 mu_s / 2) |xi|^2
    linear = math.sqrt(4.0 * params.eta(eps) * params.kappa * params.mu_w / eps)
    return min(linear, (4.0 * quadratic) ** (1.0 / 3.0))


def growth_constants(params: ModelParams, dim: int) -> Tuple[float, float]:
    """(c, C) with c |xi| - 1/c <= W_bar(xi) <= C |xi|.

    C is the maximum of sqrt(2 alpha kappa h) on the unit sphere, attained
    at Id / sqrt(n); c is the eps -> 0 limit of the coercivity constant.
    """
    upper = math.sqrt(2.0 * params.alpha * params.kappa * dim * (params.lambda_w + 2.0 * params.mu_w))
    lower = min(math.sqrt(4.0 * params.alpha * params.kappa * params.mu_w), (4.0 * params.mu_s) ** (1.0 / 3.0))
    return lower, upper


class TrescaFamily:
    """Densities of the Tresca model: G~_eps, G~, h~, K~ and its support."""

    def __init__(self, params: ModelParams):
        params.check_tresca()
        self.params = params
        self.spread_penalty = TrescaPenalty(params.mu_w)

    def weak_penalty(self, eps: float) -> LamePenalty:
        if eps <= 0:
            raise ValueError(f"eps must be positive, got {eps}")
        return LamePenalty(self.params.lambda_w / eps, self.params.mu_w)

    def G_tilde_eps(self, eps: float, tau: SymMat) -> float:
        v = symcalc.eigvals(tau)
        return float(self.weak_penalty(eps)(v[0], v[-1]))

    def G_tilde(self, tau: SymMat) -> float:
        v = symcalc.eigvals(tau)
        return float(self.spread_penalty(v[0], v[-1]))

    def _require_deviatoric(self, xi: SymMat):
        if not symcalc.is_deviatoric(xi):
            raise ValueError(f"Expected a deviatoric matrix, trace is {xi.trace()}")

    def h_tilde(self, xi: SymMat) -> float:
        self._require_deviatoric(xi)
        return float(h_tilde_eig(self.params.mu_w, symcalc.eigvals(xi)))

    def yield_spread(self) -> float:
        return 2.0 * math.sqrt(2.0 * self.params.kappa * self.params.mu_w)

    def in_K_tilde(self, tau: SymMat, tol: Optional[float] = None) -> bool:
        tol = Config.IN_K_TOL if tol is None else tol
        if not symcalc.is_deviatoric(tau):
            return False
        v = symcalc.eigvals(tau)
        return v[-1] - v[0] <= self.yield_spread() * (1.0 + tol)

    def support_K_tilde(self, xi: SymMat) -> float:
        return math.sqrt(2.0 * self.params.kappa * self.h_tilde(xi))
