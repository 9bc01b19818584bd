"""Relaxed envelopes and limit densities.

SQW_eps is the min over theta of a min-max in the damage fraction; W_bar
and W~ are computed both as a sup over the elasticity set (dual) and as an
inf-convolution (primal).  Every inner problem is solved in the eigenframe
of the strain; the rotation oracles check that reduction.
"""
import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Dict, Any, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import minimize, minimize_scalar

from brittle_limit.config import Config
from brittle_limit.models.envelope import EnvelopeEval, EnvelopeRoute, CharacterizationReport
from brittle_limit.models.errors import DualityGapError
from brittle_limit.models.params import ModelParams
from brittle_limit.models.tensors import SymMat, IsoTensor
from brittle_limit.services import symcalc, densities, spectral_kkt

logger = logging.getLogger(__name__)


@dataclass
class _RelaxationProblem:
    """theta -> F(theta, xi) for one strain, Hencky or Tresca flavour."""
    x: np.ndarray
    weak: IsoTensor
    Q: np.ndarray
    penalty: object
    penalty_scale: float
    toughness: float

    def profile(self, thetas) -> Tuple[np.ndarray, np.ndarray]:
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        inner, t = spectral_kkt.maximize_penalized(self.x, self.Q, self.penalty, thetas * self.penalty_scale)
        base = 0.5 * symcalc.iso_quad_eig(self.weak.lam, self.weak.mu, self.x)
        return base + self.toughness * thetas + (1.0 - thetas) * inner, t


def _hencky_problem(params: ModelParams, eps: float, x: np.ndarray) -> _RelaxationProblem:
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    eta = params.eta(eps)
    weak = params.weak_tensor(eps)
    effective = params.A_s.minus(weak)
    return _RelaxationProblem(
        x=x,
        weak=weak,
        Q=symcalc.iso_inverse_quad_matrix(effective, len(x)),
        penalty=densities.LamePenalty(params.lambda_w, params.mu_w),
        penalty_scale=1.0 / (2.0 * eta),
        toughness=params.kappa / eps
    )


def _tresca_problem(params: ModelParams, eps: float, x: np.ndarray) -> _RelaxationProblem:
    family = densities.TrescaFamily(params)
    weak = params.weak_tensor(eps, tresca=True)
    effective = params.A_s.minus(weak)
    return _RelaxationProblem(
        x=x,
        weak=weak,
        Q=symcalc.iso_inverse_quad_matrix(effective, len(x)),
        penalty=family.weak_penalty(eps),
        penalty_scale=1.0 / (2.0 * eps),
        toughness=params.kappa / eps
    )


def _check_theta(theta: float):
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0,1], got {theta}")


def F_eps(params: ModelParams, eps: float, theta: float, xi: SymMat) -> float:
    _check_theta(theta)
    problem = _hencky_problem(params, eps, symcalc.eigvals(xi))
    values, _ = problem.profile([theta])
    return float(values[0])


def F_eps_alternate(params: ModelParams, eps: float, theta: float, xi: SymMat) -> float:
    """Same quantity written with kappa theta^2 / eps outside and
    (theta / 2 eta)(2 kappa eta / eps - G) inside the sup."""
    _check_theta(theta)
    problem = _hencky_problem(params, eps, symcalc.eigvals(xi))
    inner, _ = spectral_kkt.maximize_penalized(problem.x, problem.Q, problem.penalty,
                                               theta * problem.penalty_scale)
    shifted = float(inner[0]) + theta * problem.toughness
    base = 0.5 * float(symcalc.iso_quad_eig(problem.weak.lam, problem.weak.mu, problem.x))
    return base + problem.toughness * theta ** 2 + (1.0 - theta) * shifted


def _minimize_over_theta(problem: _RelaxationProblem, spectrum, grid_points: Optional[int] = None) -> EnvelopeEval:
    grid_points = Config.THETA_GRID_POINTS if grid_points is None else grid_points
    thetas = np.linspace(0.0, 1.0, grid_points)
    values, taus = problem.profile(thetas)
    j = int(np.argmin(values))
    theta_opt, value, tau = float(thetas[j]), float(values[j]), taus[j]

    lo, hi = thetas[max(j - 1, 0)], thetas[min(j + 1, grid_points - 1)]
    refined = minimize_scalar(lambda th: float(problem.profile([th])[0][0]),
                              bounds=(lo, hi), method='bounded',
                              options={'xatol': Config.THETA_XATOL})
    residual = 0.0
    if refined.success and refined.fun < value:
        residual = value - float(refined.fun)
        theta_opt = float(min(max(refined.x, 0.0), 1.0))
        refined_values, refined_taus = problem.profile([theta_opt])
        value, tau = float(refined_values[0]), refined_taus[0]

    return EnvelopeEval(value=value, theta_opt=theta_opt, tau_opt=spectrum.compose(tau),
                        route=EnvelopeRoute.DUAL, residual=residual)


def sq_envelope(params: ModelParams, eps: float, xi: SymMat, grid_points: Optional[int] = None) -> EnvelopeEval:
    """SQW_eps(xi) = min over theta in [0,1] of F_eps(theta, xi)."""
    spectrum = symcalc.eigs(xi)
    return _minimize_over_theta(_hencky_problem(params, eps, spectrum.eigenvalues), spectrum, grid_points)


def sq_envelope_tresca(params: ModelParams, eps: float, xi: SymMat, grid_points: Optional[int] = None) -> EnvelopeEval:
    spectrum = symcalc.eigs(xi)
    return _minimize_over_theta(_tresca_problem(params, eps, spectrum.eigenvalues), spectrum, grid_points)


# ---------------------------------------------------------------------------
# W_bar = (f* + I_K)* = f [] sqrt(2 alpha kappa h)

def _check_gap(name: str, residual: float, reference: float, tol: Optional[float]):
    tol = Config.DUALITY_TOL if tol is None else tol
    if residual > tol * (1.0 + abs(reference)):
        logger.error(f"{name}: duality residual {residual:.3e} above tolerance {tol:.1e}")
        raise DualityGapError(f"{name} residual {residual:.3e} exceeds {tol:.1e}", residual)


def w_bar_dual(params: ModelParams, xi: SymMat, tol: Optional[float] = None) -> EnvelopeEval:
    spectrum = symcalc.eigs(xi)
    x = spectrum.eigenvalues
    Q = symcalc.iso_inverse_quad_matrix(params.A_s, xi.dim)
    penalty = densities.LamePenalty(params.lambda_w, params.mu_w)
    level = 2.0 * params.alpha * params.kappa
    best = spectral_kkt.maximize_constrained(x, Q, penalty, level)
    dual = spectral_kkt.lagrangian_dual(x, Q, penalty, level, best.multiplier)
    residual = abs(dual - best.value)
    _check_gap('w_bar_dual', residual, best.value, tol)
    return EnvelopeEval(value=best.value, tau_opt=spectrum.compose(best.t), route=EnvelopeRoute.DUAL,
                        residual=residual, multiplier=best.multiplier)


def _coordinate_descent(objective, basis, z, best, half_width):
    for _ in range(Config.PRIMAL_SWEEPS):
        start = best
        for i in range(len(z)):
            def line(s, i=i):
                trial = z.copy()
                trial[i] = s
                return float(objective(basis @ trial))
            res = minimize_scalar(line, bounds=(-half_width, half_width), method='bounded',
                                  options={'xatol': 1e-13 * (1.0 + half_width)})
            if res.fun < best:
                z = z.copy()
                z[i] = res.x
                best = float(res.fun)
        if start - best <= 1e-16 * (1.0 + abs(best)):
            break
    return z, best


def _face_refinement(objective, basis, z, best, spacing, half_width):
    """Nelder-Mead on every face {p_i = 0, i in Z}, where sqrt(h) has its kinks."""
    n, d = basis.shape
    for size in range(n + 1):
        for face in combinations(range(n), size):
            N = null_space(basis[list(face), :]) if face else np.eye(d)
            r = N.shape[1]
            if r == 0:
                candidate, value = np.zeros(d), float(objective(np.zeros(n)))
            else:
                y0 = N.T @ z
                simplex = y0 + spacing * np.vstack([np.zeros(r), np.eye(r)])
                res = minimize(lambda y: float(objective(basis @ (N @ y))), y0, method='Nelder-Mead',
                               options={'initial_simplex': simplex, 'xatol': 1e-13 * (1.0 + half_width),
                                        'fatol': 1e-16, 'maxiter': 2000 * r, 'maxfev': 4000 * r})
                candidate, value = N @ res.x, float(res.fun)
            if value < best:
                z, best = candidate, value
    return z, best


def primal_inf_convolution(objective: Callable, basis: np.ndarray, half_width: float,
                           grid_points: Optional[int] = None) -> Tuple[float, np.ndarray]:
    """Minimize ``objective`` over eigenvalue vectors p = basis @ z.

    Coarse grid on the box |z_i| <= half_width, then coordinate descent and
    a face-wise Nelder-Mead polish.  Returns (value, p).
    """
    grid_points = Config.PRIMAL_GRID_POINTS if grid_points is None else grid_points
    n, d = basis.shape
    if half_width <= 0.0:
        return float(objective(np.zeros(n))), np.zeros(n)

    axis = np.linspace(-half_width, half_width, grid_points)
    mesh = np.stack(np.meshgrid(*([axis] * d), indexing='ij'), axis=-1).reshape(-1, d)
    values = objective(mesh @ basis.T)
    k = int(np.argmin(values))
    z, best = mesh[k].copy(), float(values[k])

    z, best = _coordinate_descent(objective, basis, z, best, half_width)
    z, best = _face_refinement(objective, basis, z, best, axis[1] - axis[0], half_width)
    z, best = _coordinate_descent(objective, basis, z, best, half_width)
    return best, basis @ z


def w_bar_objective(params: ModelParams, x: np.ndarray) -> Callable:
    """p -> f(x - p) + sqrt(2 alpha kappa h(p)) on eigenvalue vectors."""
    scale = 2.0 * params.alpha * params.kappa

    def objective(p):
        p = np.asarray(p, dtype=float)
        elastic = 0.5 * symcalc.iso_quad_eig(params.lambda_s, params.mu_s, x - p)
        return elastic + np.sqrt(scale * densities.h_eig(params.lambda_w, params.mu_w, p))

    return objective


def w_bar_primal(params: ModelParams, xi: SymMat, dual: Optional[EnvelopeEval] = None,
                 tol: Optional[float] = None, grid_points: Optional[int] = None) -> EnvelopeEval:
    spectrum = symcalc.eigs(xi)
    x = spectrum.eigenvalues
    value, plastic = primal_inf_convolution(w_bar_objective(params, x), np.eye(xi.dim),
                                            Config.PRIMAL_BOX_FACTOR * xi.norm(), grid_points)
    dual = w_bar_dual(params, xi) if dual is None else dual
    residual = abs(value - dual.value)
    _check_gap('w_bar_primal', residual, dual.value, tol)
    elastic_part = spectrum.compose(x - plastic)
    return EnvelopeEval(value=value, tau_opt=symcalc.apply_iso(params.A_s, elastic_part),
                        route=EnvelopeRoute.PRIMAL, residual=residual)


def w_bar(params: ModelParams, xi: SymMat) -> float:
    return w_bar_dual(params, xi).value


def w_bar_recession(params: ModelParams, xi: SymMat) -> float:
    return densities.support_K(params, xi)


def w_bar_recession_probe(params: ModelParams, xi: SymMat, t: float) -> float:
    """W_bar(t xi) / t, nondecreasing in t with limit sqrt(2 alpha kappa h(xi))."""
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    return w_bar_dual(params, t * xi).value / t


def kohn_strang_envelope(params: ModelParams, eps: float, xi: SymMat) -> float:
    eta = params.eta(eps)
    h = densities.h_density(params, xi)
    quad = symcalc.iso_quad(params.A_w, xi)
    if h >= 2.0 * params.kappa / (eta * eps):
        return 0.5 * eta * quad + params.kappa / eps
    return math.sqrt(2.0 * eta * params.kappa * h / eps) + 0.5 * eta * (quad - h)


# ---------------------------------------------------------------------------
# Tresca limit

def w_tilde(params: ModelParams, xi_D: SymMat, check_primal: bool = True,
            tol: Optional[float] = None, grid_points: Optional[int] = None) -> EnvelopeEval:
    """W~(xi_D) = sup over tau_D in K~ of tau_D:xi_D - |tau_D|^2 / (4 mu_s)."""
    family = densities.TrescaFamily(params)
    if not symcalc.is_deviatoric(xi_D):
        raise ValueError(f"w_tilde expects a deviatoric strain, trace is {xi_D.trace()}")
    spectrum = symcalc.eigs(xi_D)
    x = spectrum.eigenvalues
    n = xi_D.dim
    Q = np.eye(n) / (2.0 * params.mu_s)
    level = 2.0 * params.kappa
    best = spectral_kkt.maximize_constrained(x, Q, family.spread_penalty, level)
    dual = spectral_kkt.lagrangian_dual(x, Q, family.spread_penalty, level, best.multiplier)
    residual = abs(dual - best.value)
    _check_gap('w_tilde dual', residual, best.value, tol)

    if check_primal:
        mu_w = params.mu_w

        def objective(p):
            p = np.asarray(p, dtype=float)
            diff = x - p
            return params.mu_s * np.sum(diff * diff, axis=-1) + np.sqrt(2.0 * params.kappa * densities.h_tilde_eig(mu_w, p))

        basis = null_space(np.ones((1, n)))
        primal, _ = primal_inf_convolution(objective, basis, Config.PRIMAL_BOX_FACTOR * xi_D.norm(), grid_points)
        residual = max(residual, abs(primal - best.value))
        _check_gap('w_tilde primal', residual, best.value, tol)

    return EnvelopeEval(value=best.value, tau_opt=spectrum.compose(best.t), route=EnvelopeRoute.DUAL,
                        residual=residual, multiplier=best.multiplier)


def tresca_limit_bulk(params: ModelParams, xi: SymMat, check_primal: bool = False) -> float:
    """(tr xi)^2 (lambda_s / 2 + mu_s / n) + W~(xi_D)."""
    trace, xi_D = symcalc.dev_split(xi)
    spherical = trace ** 2 * (0.5 * params.lambda_s + params.mu_s / xi.dim)
    return spherical + w_tilde(params, xi_D, check_primal=check_primal).value


# ---------------------------------------------------------------------------
# Diagnostics

def characterization_check(params: ModelParams, xi_samples: Sequence[SymMat],
                           rank_one_samples: Sequence[Tuple[np.ndarray, np.ndarray]],
                           rel_tol: float = 1e-12) -> CharacterizationReport:
    """W_bar <= f and W_bar(a (.) b) <= sqrt(2 alpha kappa A_w(a (.) b):(a (.) b))."""
    report = CharacterizationReport(samples=len(xi_samples), rank_one_samples=len(rank_one_samples))
    slope = 2.0 * params.alpha * params.kappa

    for xi in xi_samples:
        value = w_bar(params, xi)
        bound = densities.f_strong(params, xi)
        excess = value - bound
        report.max_f_excess = max(report.max_f_excess, excess)
        if excess > rel_tol * (1.0 + bound):
            report.f_violations += 1
            report.worst_inputs.append({'check': 'f', 'xi': xi.to_dict(), 'excess': excess})

    for a, b in rank_one_samples:
        xi = symcalc.sym_outer(a, b)
        bound = math.sqrt(slope * symcalc.iso_quad(params.A_w, xi))
        excess = w_bar(params, xi) - bound
        report.max_rank_one_excess = max(report.max_rank_one_excess, excess)
        if excess > rel_tol * (1.0 + bound):
            report.rank_one_violations += 1
            report.worst_inputs.append({'check': 'rank_one', 'a': list(map(float, a)),
                                        'b': list(map(float, b)), 'excess': excess})
        gap = abs(w_bar_recession(params, xi) - bound) / (1.0 + bound)
        report.max_recession_gap = max(report.max_recession_gap, gap)

    logger.info(f"Characterization check: {report.f_violations} f-violations, "
                f"{report.rank_one_violations} rank-one violations over "
                f"{report.samples} + {report.rank_one_samples} samples")
    return report


def envelope_monotonicity(params: ModelParams, xi: SymMat, eps_list: Sequence[float]) -> Dict[str, Any]:
    """Whether SQW_eps(xi) is nonincreasing as eps decreases along the schedule.

    Nothing guarantees this; a failure is logged, not raised.
    """
    ordered = sorted(eps_list, reverse=True)
    values = [sq_envelope(params, eps, xi).value for eps in ordered]
    monotone = all(b <= a * (1.0 + 1e-12) + 1e-15 for a, b in zip(values, values[1:]))
    if not monotone:
        logger.warning(f"SQW_eps not monotone in eps at xi={xi.entries}: {values}")
    return {'eps': ordered, 'values': values, 'monotone': monotone}
