"""Brute-force oracles for the semi-analytic shortcuts.

Everything here works on full matrices with numpy's batched eigvalsh, so
none of it shares code paths with the eigenframe solvers it checks.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import null_space

from brittle_limit.config import Config
from brittle_limit.models.errors import DualityGapError
from brittle_limit.models.oracle import OracleReport
from brittle_limit.models.params import ModelParams
from brittle_limit.models.tensors import SymMat
from brittle_limit.services import symcalc, densities, envelopes, spectral_kkt
from brittle_limit.services.parallel import ordered_map

logger = logging.getLogger(__name__)

ROTATION_OPS = ('F_eps', 'w_bar_dual', 'w_bar_primal')
CONVEXITY_FNS = ('w_bar', 'sqrt_h_r', 'w_tilde', 'w_eps')


def _rng(seed: Optional[int]) -> np.random.Generator:
    return np.random.default_rng(Config.DEFAULT_SEED if seed is None else seed)


def _samples(samples: Optional[int]) -> int:
    samples = Config.ORACLE_SAMPLES if samples is None else samples
    return int(min(samples, Config.ORACLE_MAX_SAMPLES))


def _grid_points(dim: int, requested: Optional[int] = None, cap: int = 2001) -> int:
    if requested is not None:
        return requested
    return int(min(cap, math.floor(Config.ORACLE_MAX_GRID_POINTS ** (1.0 / dim) + 1e-9)))


def _mesh(axes: List[np.ndarray]) -> np.ndarray:
    return np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1).reshape(-1, len(axes))


def _iso_quad_batch(lam: float, mu: float, mats: np.ndarray) -> np.ndarray:
    trace = np.trace(mats, axis1=-2, axis2=-1)
    return lam * trace ** 2 + 2.0 * mu * np.sum(mats * mats, axis=(-2, -1))


def _iso_inverse_quad_batch(lam: float, mu: float, mats: np.ndarray) -> np.ndarray:
    n = mats.shape[-1]
    trace = np.trace(mats, axis1=-2, axis2=-1)
    deviatoric = np.sum(mats * mats, axis=(-2, -1)) - trace ** 2 / n
    return trace ** 2 / (n * (n * lam + 2.0 * mu)) + deviatoric / (2.0 * mu)


def _random_rotations(count: int, n: int, rng: np.random.Generator) -> np.ndarray:
    return np.stack([symcalc.random_rotation(n, rng) for _ in range(count)])


def _random_unit_symmats(count: int, n: int, rng: np.random.Generator) -> np.ndarray:
    raw = rng.standard_normal((count, n, n))
    sym = 0.5 * (raw + np.swapaxes(raw, 1, 2))
    return sym / np.linalg.norm(sym, axis=(1, 2))[:, None, None]


def sample_strain(rng: np.random.Generator, dim: int, k: int = 0, scale: float = 1.0) -> SymMat:
    """Random strain; every fourth draw has two eigenvalues within 1e-9."""
    if k % 4 != 3:
        return symcalc.random_symmat(dim, rng, scale)
    values = scale * rng.standard_normal(dim)
    values[1] = values[0] + 1e-9 * scale
    R = symcalc.random_rotation(dim, rng)
    return SymMat.from_matrix((R * values) @ R.T)


# ---------------------------------------------------------------------------
# Inf-convolution

@dataclass
class InfConvolutionEstimate:
    diagonal: float
    general: float
    bound: float
    spacing: float

    @property
    def value(self) -> float:
        return min(self.diagonal, self.general)


def brute_inf_convolution(params: ModelParams, xi: SymMat, grid_points: Optional[int] = None,
                          general_samples: Optional[int] = None, seed: Optional[int] = None) -> InfConvolutionEstimate:
    """Grid minimum of f(xi - xi') + sqrt(2 alpha kappa h(xi')).

    ``diagonal`` scans xi' diagonal in the eigenframe of xi on the box
    [-4|xi|, 4|xi|]^n; ``general`` is a coarser sample of arbitrary
    symmetric xi'.  ``bound`` is the Lipschitz resolution bound of the grid.
    """
    n = xi.dim
    radius = Config.PRIMAL_BOX_FACTOR * xi.norm()
    if radius == 0.0:
        return InfConvolutionEstimate(0.0, 0.0, 0.0, 0.0)

    spectrum = symcalc.eigs(xi)
    objective = envelopes.w_bar_objective(params, spectrum.eigenvalues)
    points = _grid_points(n, grid_points)
    axis = np.linspace(-radius, radius, points)
    best, best_p = math.inf, None
    for first in axis:
        rest = _mesh([axis] * (n - 1))
        chunk = np.column_stack([np.full(len(rest), first), rest])
        values = objective(chunk)
        k = int(np.argmin(values))
        if values[k] < best:
            best, best_p = float(values[k]), chunk[k]
    spacing = float(axis[1] - axis[0])

    upper = densities.growth_constants(params, n)[1]
    lipschitz = (n * params.lambda_s + 2.0 * params.mu_s) * (xi.norm() + radius * math.sqrt(n)) + upper
    bound = 0.5 * spacing * math.sqrt(n) * lipschitz

    rng = _rng(seed)
    count = _samples(general_samples)
    rotations = _random_rotations(count, n, rng)
    diagonals = best_p + spacing * rng.uniform(-2.0, 2.0, size=(count, n))
    diagonals[count // 2:] = rng.uniform(-radius, radius, size=(count - count // 2, n))
    frame = spectrum.frame
    local = np.einsum('kij,kj,klj->kil', rotations, diagonals, rotations)
    candidates = frame @ local @ frame.T
    elastic = 0.5 * _iso_quad_batch(params.lambda_s, params.mu_s, xi.to_matrix() - candidates)
    slopes = densities.h_eig(params.lambda_w, params.mu_w, np.linalg.eigvalsh(candidates))
    general = float(np.min(elastic + np.sqrt(2.0 * params.alpha * params.kappa * slopes)))
    return InfConvolutionEstimate(best, general, bound, spacing)


def scalar_inf_convolution(stiffness: float, slope: float, s: float, points: int = 200001) -> float:
    """Grid inf over y of stiffness (s - y)^2 / 2 + slope |y|."""
    radius = Config.PRIMAL_BOX_FACTOR * max(abs(s), 1.0)
    y = np.linspace(-radius, radius, points)
    return float(np.min(0.5 * stiffness * (s - y) ** 2 + slope * np.abs(y)))


# ---------------------------------------------------------------------------
# Eigenframe reduction

def _feasible_scaling(params: ModelParams, taus: np.ndarray, level: float) -> np.ndarray:
    ev = np.linalg.eigvalsh(taus)
    g = densities.LamePenalty(params.lambda_w, params.mu_w)(ev[:, 0], ev[:, -1])
    factor = np.where(g > level, np.sqrt(level / np.maximum(g, 1e-300)), 1.0)
    return taus * factor[:, None, None]


def _stress_samples(center: np.ndarray, frame: np.ndarray, values: np.ndarray, count: int,
                    rng: np.random.Generator) -> np.ndarray:
    """Perturbations of ``center`` at all scales plus re-rotated copies of its spectrum."""
    n = center.shape[0]
    half = count // 2
    scales = (1.0 + np.linalg.norm(center)) * np.logspace(-7, 0, half)
    perturbed = center + scales[:, None, None] * _random_unit_symmats(half, n, rng)
    rotations = _random_rotations(count - half, n, rng)
    rotated = frame @ np.einsum('kij,j,klj->kil', rotations, values, rotations) @ frame.T
    return np.concatenate([perturbed, rotated])


def _rotation_case(params: ModelParams, op_id: str, xi: SymMat, rng: np.random.Generator,
                   eps: float, probes: int) -> Tuple[float, float]:
    """(abs_gap, reference value) for one strain."""
    R = symcalc.random_rotation(xi.dim, rng)
    rotated = symcalc.rotate(xi, R)
    spectrum = symcalc.eigs(xi)
    xm = xi.to_matrix()
    n = xi.dim

    if op_id == 'w_bar_dual':
        base = envelopes.w_bar_dual(params, xi)
        isotropy = abs(envelopes.w_bar_dual(params, rotated).value - base.value)
        level = 2.0 * params.alpha * params.kappa
        t = symcalc.eigvals(base.tau_opt)
        taus = _stress_samples(base.tau_opt.to_matrix(), spectrum.frame, t, probes, rng)
        taus = _feasible_scaling(params, taus, level)
        values = np.einsum('ij,kij->k', xm, taus) - 0.5 * _iso_inverse_quad_batch(params.lambda_s, params.mu_s, taus)
        return max(isotropy, max(float(values.max()) - base.value, 0.0)), base.value

    if op_id == 'F_eps':
        theta = float(rng.uniform(0.05, 0.95))
        isotropy = abs(envelopes.F_eps(params, eps, theta, rotated) - envelopes.F_eps(params, eps, theta, xi))
        effective = params.A_s.minus(params.weak_tensor(eps))
        Q = symcalc.iso_inverse_quad_matrix(effective, n)
        penalty = densities.LamePenalty(params.lambda_w, params.mu_w)
        c = theta / (2.0 * params.eta(eps))
        value, t = spectral_kkt.maximize_penalized(spectrum.eigenvalues, Q, penalty, c)
        center = spectrum.compose(t[0]).to_matrix()
        taus = _stress_samples(center, spectrum.frame, t[0], probes, rng)
        ev = np.linalg.eigvalsh(taus)
        sampled = (np.einsum('ij,kij->k', xm, taus)
                   - 0.5 * _iso_inverse_quad_batch(effective.lam, effective.mu, taus)
                   - c * penalty(ev[:, 0], ev[:, -1]))
        return max(isotropy, max(float(sampled.max()) - float(value[0]), 0.0)), float(value[0])

    if op_id == 'w_bar_primal':
        try:
            base = envelopes.w_bar_primal(params, xi)
        except DualityGapError as e:
            return float(e.residual), envelopes.w_bar(params, xi)
        estimate = brute_inf_convolution(params, xi, grid_points=_grid_points(n, cap=41),
                                         general_samples=probes, seed=int(rng.integers(2 ** 31)))
        return max(base.value - estimate.general, 0.0), base.value

    raise ValueError(f"Unknown rotation op {op_id!r}; expected one of {ROTATION_OPS}")


def rotation_robustness(params: ModelParams, op_id: str, samples: Optional[int] = None, seed: Optional[int] = None,
                        dim: int = 3, eps: float = 0.1, probes: int = 64) -> OracleReport:
    """Eigenframe-restricted optima against rotated and full-space sampled candidates."""
    if op_id not in ROTATION_OPS:
        raise ValueError(f"Unknown rotation op {op_id!r}; expected one of {ROTATION_OPS}")
    rng = _rng(seed)
    count = _samples(samples)
    report = OracleReport(name=f'rotation_{op_id}', samples=count, seed=seed, tolerance=1e-6)
    for k in range(count):
        xi = sample_strain(rng, dim, k, scale=float(np.exp(rng.uniform(-1.0, 1.5))))
        gap, value = _rotation_case(params, op_id, xi, rng, eps, probes)
        report.record(gap, gap / (1.0 + abs(value)), {'xi': xi.to_dict(), 'value': value})
    logger.info(f"{report}")
    return report


# ---------------------------------------------------------------------------
# Conjugates

@dataclass
class ConjugateEstimate:
    value: float
    reference: float

    @property
    def gap(self) -> float:
        return abs(self.value - self.reference)


def _zoomed_grid_max(objective: Callable, dim: int, radius: float, points: int, levels: int) -> float:
    center = np.zeros(dim)
    half = radius
    best = -math.inf
    for _ in range(levels + 1):
        axis = np.linspace(-half, half, points)
        mesh = center + _mesh([axis] * dim)
        values = objective(mesh)
        k = int(np.argmax(values))
        if values[k] > best:
            best, center = float(values[k]), mesh[k]
        half = 8.0 * (axis[1] - axis[0])
    return best


def conjugate_bruteforce(params: ModelParams, which: str, xi: SymMat, grid_points: Optional[int] = None,
                         levels: int = 6) -> ConjugateEstimate:
    """Grid sup of 2 tau:xi - G(tau) (compare h) or tau:xi - G~(tau) over deviatoric tau (compare h~/4)."""
    n = xi.dim
    x = symcalc.eigvals(xi)
    norm = xi.norm()
    if which == 'G':
        reference = densities.h_density(params, xi)
        if norm == 0.0:
            return ConjugateEstimate(0.0, reference)
        penalty = densities.LamePenalty(params.lambda_w, params.mu_w)
        radius = 4.0 * n * (params.lambda_w + 2.0 * params.mu_w) * norm

        def objective(t):
            return 2.0 * t @ x - penalty(t.min(axis=1), t.max(axis=1))

        points = _grid_points(n, grid_points, cap=401)
        return ConjugateEstimate(_zoomed_grid_max(objective, n, radius, points, levels), reference)

    if which == 'G_tilde':
        family = densities.TrescaFamily(params)
        reference = family.h_tilde(xi) / 4.0
        if norm == 0.0:
            return ConjugateEstimate(0.0, reference)
        basis = null_space(np.ones((1, n)))
        radius = 8.0 * n * params.mu_w * norm

        def objective(z):
            t = z @ basis.T
            return t @ x - family.spread_penalty(t.min(axis=1), t.max(axis=1))

        points = _grid_points(n - 1, grid_points, cap=401)
        return ConjugateEstimate(_zoomed_grid_max(objective, n - 1, radius, points, levels), reference)

    raise ValueError(f"Unknown conjugate {which!r}; expected 'G' or 'G_tilde'")


def conjugate_report(params: ModelParams, which: str, samples: int = 10, seed: Optional[int] = None,
                     dim: int = 2) -> OracleReport:
    rng = _rng(seed)
    report = OracleReport(name=f'conjugate_{which}', samples=samples, seed=seed, tolerance=1e-6)
    for k in range(samples):
        xi = symcalc.random_symmat(dim, rng)
        if which == 'G_tilde':
            xi = symcalc.dev_split(xi)[1]
        estimate = conjugate_bruteforce(params, which, xi)
        report.record(estimate.gap, estimate.gap / (1.0 + abs(estimate.reference)),
                      {'xi': xi.to_dict(), 'value': estimate.value, 'reference': estimate.reference})
    logger.info(f"{report}")
    return report


# ---------------------------------------------------------------------------
# Convexity

_MIX = np.linspace(0.1, 0.9, 9)


def _crossover_segment(params: ModelParams, eps: float, dim: int, rng: np.random.Generator) -> Tuple[SymMat, SymMat]:
    """Segment from 0 to just below twice the f = g_eps crossover along a random direction."""
    weak = params.weak_tensor(eps)
    effective = params.A_s.minus(weak)
    while True:
        d = symcalc.random_symmat(dim, rng)
        d = (1.0 / d.norm()) * d
        quad = symcalc.iso_quad(effective, d)
        if quad > 0:
            break
    t_cross = math.sqrt(2.0 * params.kappa / (eps * quad))
    return SymMat.zeros(dim), (1.998 * t_cross) * d


def convexity_probe(params: ModelParams, fn_id: str, samples: Optional[int] = None, seed: Optional[int] = None,
                    dim: int = 2, eps: float = 0.1) -> OracleReport:
    """Worst convexity defect phi(l a + (1-l) b) - l phi(a) - (1-l) phi(b) on random segments.

    ``w_eps`` is expected to fail; its segments straddle the f = g_eps crossover.
    """
    if fn_id not in CONVEXITY_FNS:
        raise ValueError(f"Unknown function {fn_id!r}; expected one of {CONVEXITY_FNS}")
    rng = _rng(seed)
    count = _samples(samples)
    slope = 2.0 * params.alpha * params.kappa
    report = OracleReport(name=f'convexity_{fn_id}', samples=count, seed=seed, tolerance=1e-8,
                          expect_violation=fn_id == 'w_eps')

    for k in range(count):
        if fn_id == 'w_eps':
            a, b = _crossover_segment(params, eps, dim, rng)
            phi = lambda e: densities.w_eps(params, eps, e)
        else:
            scale = float(np.exp(rng.uniform(-1.0, 1.5)))
            a = symcalc.random_symmat(dim, rng, scale)
            b = symcalc.random_symmat(dim, rng, scale)
            if fn_id == 'w_bar':
                phi = lambda e: envelopes.w_bar(params, e)
            elif fn_id == 'w_tilde':
                a, b = symcalc.dev_split(a)[1], symcalc.dev_split(b)[1]
                phi = lambda e: envelopes.w_tilde(params, symcalc.dev_split(e)[1], check_primal=False).value
            else:
                r = float(rng.uniform(0.0, 1.0))
                if dim != 2:
                    a, b = symcalc.random_symmat(2, rng, scale), symcalc.random_symmat(2, rng, scale)
                phi = lambda e, r=r: math.sqrt(slope * max(densities.h_r(params, r, e), 0.0))

        fa, fb = phi(a), phi(b)
        for lam in _MIX:
            mix = lam * a + (1.0 - lam) * b
            chord = lam * fa + (1.0 - lam) * fb
            defect = phi(mix) - chord
            violation = max(defect, 0.0)
            report.record(violation, violation / (1.0 + abs(chord)),
                          {'a': a.to_dict(), 'b': b.to_dict(), 'lambda': float(lam), 'defect': defect})
    logger.info(f"{report}")
    return report


# ---------------------------------------------------------------------------
# Growth, Lipschitz and duality

def growth_probe(params: ModelParams, samples: Optional[int] = None, seed: Optional[int] = None,
                 dim: int = 3) -> OracleReport:
    """c|xi| - 1/c <= W_bar(xi) <= C|xi| and |W_bar(a) - W_bar(b)| <= C|a - b|."""
    rng = _rng(seed)
    count = _samples(samples)
    lower, upper = densities.growth_constants(params, dim)
    report = OracleReport(name='growth', samples=count, seed=seed, tolerance=1e-10,
                          details={'c': lower, 'C': upper})
    for _ in range(count):
        scale = float(np.exp(rng.uniform(-2.0, 3.0)))
        a = symcalc.random_symmat(dim, rng, scale)
        b = symcalc.random_symmat(dim, rng, scale)
        wa, wb = envelopes.w_bar(params, a), envelopes.w_bar(params, b)
        excess = max(lower * a.norm() - 1.0 / lower - wa, wa - upper * a.norm(),
                     abs(wa - wb) - upper * (a - b).norm(), 0.0)
        report.record(excess, excess / (1.0 + wa), {'a': a.to_dict(), 'b': b.to_dict()})
    return report


def duality_triple(params: ModelParams, samples: Optional[int] = None, seed: Optional[int] = None,
                   dim: int = 3) -> OracleReport:
    """Dual, primal and brute-force grid values of W_bar on random strains."""
    rng = _rng(seed)
    count = _samples(samples)
    report = OracleReport(name='inf_convolution', samples=count, seed=seed, tolerance=Config.DUALITY_TOL)
    for k in range(count):
        xi = sample_strain(rng, dim, k, scale=float(np.exp(rng.uniform(-1.0, 1.5))))
        dual = envelopes.w_bar_dual(params, xi)
        try:
            primal_gap = envelopes.w_bar_primal(params, xi, dual=dual).residual
        except DualityGapError as e:
            primal_gap = float(e.residual)
        brute = brute_inf_convolution(params, xi, grid_points=_grid_points(dim, cap=41),
                                      general_samples=64, seed=int(rng.integers(2 ** 31)))
        below = max(dual.value - brute.value, 0.0)
        above = max(brute.diagonal - dual.value - brute.bound, 0.0)
        gap = max(primal_gap, below, above)
        report.record(gap, gap / (1.0 + dual.value),
                      {'xi': xi.to_dict(), 'dual': dual.value, 'brute': brute.value, 'bound': brute.bound})
    return report


def characterization_report(params: ModelParams, samples: Optional[int] = None, seed: Optional[int] = None,
                            dim: int = 3) -> OracleReport:
    rng = _rng(seed)
    count = _samples(samples)
    xis = [symcalc.random_symmat(dim, rng, float(np.exp(rng.uniform(-1.0, 2.0)))) for _ in range(count)]
    pairs = [(rng.standard_normal(dim), rng.standard_normal(dim)) for _ in range(count)]
    check = envelopes.characterization_check(params, xis, pairs)
    excess = max(check.max_f_excess, check.max_rank_one_excess, 0.0)
    report = OracleReport(name='characterization', samples=2 * count, seed=seed, tolerance=1e-12,
                          details=check.to_dict())
    report.record(excess, excess, check.worst_inputs[0] if check.worst_inputs else {})
    return report


# ---------------------------------------------------------------------------
# Suite

@dataclass(frozen=True)
class _OracleTask:
    name: str
    params: ModelParams
    samples: int
    seed: int


# (name, runner, share of the sample budget, acceptance count)
ORACLE_SUITE: Tuple[Tuple[str, Callable[[ModelParams, int, int], OracleReport], float, int], ...] = (
    ('inf_convolution', lambda p, n, s: duality_triple(p, n, s), 0.05, 1_000),
    ('rotation_w_bar_dual', lambda p, n, s: rotation_robustness(p, 'w_bar_dual', n, s), 0.5, 100),
    ('rotation_F_eps', lambda p, n, s: rotation_robustness(p, 'F_eps', n, s), 0.5, 100),
    ('rotation_w_bar_primal', lambda p, n, s: rotation_robustness(p, 'w_bar_primal', n, s), 0.05, 100),
    ('conjugate_G', lambda p, n, s: conjugate_report(p, 'G', 10, s), 0.0, 1),
    ('conjugate_G_tilde', lambda p, n, s: conjugate_report(p, 'G_tilde', 10, s, dim=3), 0.0, 1),
    ('convexity_w_bar', lambda p, n, s: convexity_probe(p, 'w_bar', n, s, dim=3), 0.2, 10_000),
    ('convexity_sqrt_h_r', lambda p, n, s: convexity_probe(p, 'sqrt_h_r', n, s), 1.0, 10_000),
    ('convexity_w_tilde', lambda p, n, s: convexity_probe(p, 'w_tilde', n, s, dim=3), 0.2, 10_000),
    ('convexity_w_eps', lambda p, n, s: convexity_probe(p, 'w_eps', n, s), 0.1, 1),
    ('growth', lambda p, n, s: growth_probe(p, n, s), 1.0, 10_000),
    ('characterization', lambda p, n, s: characterization_report(p, n, s), 1.0, 10_000),
)

_RUNNERS = {name: runner for name, runner, _, _ in ORACLE_SUITE}


def _run_task(task: _OracleTask) -> OracleReport:
    logger.info(f"Running oracle {task.name} with {task.samples} samples")
    return _RUNNERS[task.name](task.params, task.samples, task.seed)


def suite_plan(samples: Optional[int] = None, cfg=None, only: Optional[List[str]] = None) -> List[Tuple[str, int]]:
    """(name, sample count) of every oracle to run, in suite order.

    The budget comes from ``cfg`` (default Config); a config with ORACLE_ACCEPTANCE_COUNTS
    raises every count to its acceptance count.
    """
    cfg = Config if cfg is None else cfg
    budget = int(min(cfg.ORACLE_SAMPLES if samples is None else samples, cfg.ORACLE_MAX_SAMPLES))
    plan = []
    for name, _, share, acceptance in ORACLE_SUITE:
        if only is not None and name not in only:
            continue
        count = max(1, int(round(share * budget)))
        if cfg.ORACLE_ACCEPTANCE_COUNTS:
            count = max(count, min(acceptance, cfg.ORACLE_MAX_SAMPLES))
        plan.append((name, count))
    return plan


def run_suite(params: ModelParams, samples: Optional[int] = None, seed: Optional[int] = None,
              jobs: Optional[int] = None, only: Optional[List[str]] = None, cfg=None) -> List[OracleReport]:
    """Run the oracle suite in its fixed order; oracle k gets seed + k."""
    seed = (Config if cfg is None else cfg).DEFAULT_SEED if seed is None else seed
    tasks = [_OracleTask(name, params, count, seed + suite_index(name))
             for name, count in suite_plan(samples, cfg, only)]
    return ordered_map(_run_task, tasks, jobs)


def suite_index(name: str) -> int:
    return [n for n, _, _, _ in ORACLE_SUITE].index(name)
