"""Alternating minimization of the discrete damage energy on 2-D grids.

Bilinear (Q1) elements on square cells, 2x2 Gauss quadrature, one damage
indicator per cell.  The elastic step is a matrix-free Jacobi-preconditioned
CG on the free degrees of freedom; the damage step is the exact per-cell
minimizer at fixed displacement.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from brittle_limit.config import Config
from brittle_limit.models.errors import SolverConvergenceError
from brittle_limit.models.grid import (
    BoundaryCondition, BoundaryKind, GridState, InitKind, AlternationResult, RegimeReport
)
from brittle_limit.models.params import ModelParams, EtaSchedule, EtaKind, Regime
from brittle_limit.models.tensors import IsoTensor, SymMat
from brittle_limit.services import symcalc, densities, envelopes
from brittle_limit.services.parallel import ordered_map

logger = logging.getLogger(__name__)

_GAUSS = 1.0 / math.sqrt(3.0)
_REF_NODES = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
_REF_POINTS = _GAUSS * _REF_NODES


def _reference_gradients() -> Tuple[np.ndarray, np.ndarray]:
    """dN_a/dxi and dN_a/deta at the four Gauss points, shape (gauss, node)."""
    gx, gy = _REF_POINTS[:, 0:1], _REF_POINTS[:, 1:2]
    ax, ay = _REF_NODES[:, 0], _REF_NODES[:, 1]
    return 0.25 * ax * (1.0 + gy * ay), 0.25 * ay * (1.0 + gx * ax)


class ElasticityOperator:
    """Matrix-free Q1 stiffness for cellwise constant isotropic moduli."""

    def __init__(self, state: GridState, lam: np.ndarray, mu: np.ndarray):
        self.state = state
        self.lam = np.asarray(lam, dtype=float)[:, None]
        self.mu = np.asarray(mu, dtype=float)[:, None]
        self.weight = state.h ** 2 / 4.0
        dxi, deta = _reference_gradients()
        self.DX = 2.0 / state.h * dxi
        self.DY = 2.0 / state.h * deta
        self.conn = self._connectivity(state.nx, state.ny)

    @staticmethod
    def _connectivity(nx: int, ny: int) -> np.ndarray:
        i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing='xy')
        n0 = (j * (nx + 1) + i).ravel()
        return np.column_stack([n0, n0 + 1, n0 + nx + 2, n0 + nx + 1])

    def strains(self, U: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(e11, e22, e12) at every Gauss point, each of shape (cells, 4)."""
        ux = U[self.conn, 0]
        uy = U[self.conn, 1]
        e11 = ux @ self.DX.T
        e22 = uy @ self.DY.T
        e12 = 0.5 * (ux @ self.DY.T + uy @ self.DX.T)
        return e11, e22, e12

    def apply(self, U: np.ndarray) -> np.ndarray:
        e11, e22, e12 = self.strains(U)
        trace = e11 + e22
        s11 = self.lam * trace + 2.0 * self.mu * e11
        s22 = self.lam * trace + 2.0 * self.mu * e22
        s12 = 2.0 * self.mu * e12
        fx = self.weight * (s11 @ self.DX + s12 @ self.DY)
        fy = self.weight * (s12 @ self.DX + s22 @ self.DY)
        n = self.state.n_nodes
        idx = self.conn.ravel()
        return np.column_stack([np.bincount(idx, weights=fx.ravel(), minlength=n),
                                np.bincount(idx, weights=fy.ravel(), minlength=n)])

    def diagonal(self) -> np.ndarray:
        axial = self.lam + 2.0 * self.mu
        dx2, dy2 = self.DX ** 2, self.DY ** 2
        n = self.state.n_nodes
        idx = self.conn.ravel()
        kx = self.weight * (axial * dx2.sum(axis=0)[None, :] + self.mu * dy2.sum(axis=0)[None, :])
        ky = self.weight * (axial * dy2.sum(axis=0)[None, :] + self.mu * dx2.sum(axis=0)[None, :])
        return np.column_stack([np.bincount(idx, weights=kx.ravel(), minlength=n),
                                np.bincount(idx, weights=ky.ravel(), minlength=n)])

    def quadratic_density(self, U: np.ndarray, lam, mu) -> np.ndarray:
        """Per-cell integral of C e(u):e(u) for the cellwise moduli (lam, mu)."""
        e11, e22, e12 = self.strains(U)
        lam = np.asarray(lam, dtype=float).reshape(-1, 1)
        mu = np.asarray(mu, dtype=float).reshape(-1, 1)
        dens = lam * (e11 + e22) ** 2 + 2.0 * mu * (e11 ** 2 + e22 ** 2 + 2.0 * e12 ** 2)
        return self.weight * dens.sum(axis=1)

    def energy(self, U: np.ndarray) -> float:
        return 0.5 * float(self.quadratic_density(U, self.lam, self.mu).sum())


def _weak_tensor(params: ModelParams, eps: float, tresca: bool) -> IsoTensor:
    if tresca:
        params.check_tresca()
    return params.weak_tensor(eps, tresca=tresca)


def cell_moduli(state: GridState, params: ModelParams, eps: float, tresca: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    weak = _weak_tensor(params, eps, tresca)
    chi = state.damage.astype(bool)
    return (np.where(chi, weak.lam, params.lambda_s),
            np.where(chi, weak.mu, params.mu_s))


def operator_for(state: GridState, params: ModelParams, eps: float, tresca: bool = False) -> ElasticityOperator:
    return ElasticityOperator(state, *cell_moduli(state, params, eps, tresca))


@dataclass
class ElasticSolution:
    displacement: np.ndarray
    trace: List[float] = field(default_factory=list)
    iterations: int = 0
    residual: float = 0.0


def solve_elastic(state: GridState, params: ModelParams, eps: float, tresca: bool = False,
                  tol: Optional[float] = None, max_iters: Optional[int] = None) -> ElasticSolution:
    """Minimize the elastic energy over free nodes at fixed damage.

    ``trace`` holds the energy after every CG iteration.
    """
    tol = Config.CG_TOL if tol is None else tol
    max_iters = Config.CG_MAX_ITERS if max_iters is None else max_iters
    op = operator_for(state, params, eps, tresca)

    constrained = state.constrained_nodes()
    U = state.displacement.copy()
    U[constrained] = state.bc.values(state.node_coords()[constrained])
    free = np.zeros_like(U, dtype=bool)
    free[~constrained] = True

    E0 = op.energy(U)
    forces = op.apply(U)
    b = -forces[free]
    reference = max(np.linalg.norm(b), np.linalg.norm(forces))
    if b.size == 0 or np.linalg.norm(b) <= tol * reference or reference == 0.0:
        return ElasticSolution(U, [E0], 0, 0.0)

    inv_diag = 1.0 / op.diagonal()[free]
    full = np.zeros_like(U)
    x = np.zeros_like(b)
    r = b.copy()
    z = inv_diag * r
    p = z.copy()
    rz = r @ z
    trace = [E0]

    for k in range(1, max_iters + 1):
        full[free] = p
        Ap = op.apply(full)[free]
        step = rz / (p @ Ap)
        x += step * p
        r -= step * Ap
        trace.append(E0 - 0.5 * float(x @ (b + r)))
        residual = np.linalg.norm(r)
        if residual <= tol * reference:
            U[free] += x
            logger.debug(f"CG converged in {k} iterations, residual {residual / reference:.2e}")
            return ElasticSolution(U, trace, k, residual / reference)
        z = inv_diag * r
        rz_next = r @ z
        p = z + (rz_next / rz) * p
        rz = rz_next

    relative = float(np.linalg.norm(r) / reference)
    logger.error(f"CG did not converge in {max_iters} iterations (residual {relative:.2e})")
    raise SolverConvergenceError(f"CG stalled after {max_iters} iterations", max_iters, relative)


def elastic_solve(state: GridState, params: ModelParams, eps: float, tresca: bool = False,
                  tol: Optional[float] = None, max_iters: Optional[int] = None) -> np.ndarray:
    solution = solve_elastic(state, params, eps, tresca, tol, max_iters)
    state.displacement = solution.displacement
    return solution.displacement


def damage_update(state: GridState, params: ModelParams, eps: float, tresca: bool = False) -> np.ndarray:
    """chi = 1 exactly on cells where the mean of (A_s - A_weak) e:e reaches 2 kappa / eps."""
    weak = _weak_tensor(params, eps, tresca)
    op = ElasticityOperator(state, np.full(state.n_cells, params.lambda_s), np.full(state.n_cells, params.mu_s))
    contrast = op.quadratic_density(state.displacement, params.lambda_s - weak.lam, params.mu_s - weak.mu)
    mean = contrast / state.cell_area
    return (mean >= 2.0 * params.kappa / eps).astype(np.int8)


def discrete_energy(state: GridState, params: ModelParams, eps: float, tresca: bool = False) -> float:
    op = operator_for(state, params, eps, tresca)
    return op.energy(state.displacement) + params.kappa / eps * state.damaged_volume()


def initial_damage(state: GridState, params: ModelParams, eps: float, kind: InitKind = InitKind.UNDAMAGED,
                   rng: Optional[np.random.Generator] = None, tresca: bool = False) -> np.ndarray:
    kind = InitKind(kind)
    if kind is InitKind.UNDAMAGED:
        return np.zeros(state.n_cells, dtype=np.int8)
    if kind is InitKind.RANDOM:
        rng = np.random.default_rng(Config.DEFAULT_SEED) if rng is None else rng
        return (rng.random(state.n_cells) < Config.RANDOM_DAMAGE_FRACTION).astype(np.int8)
    if kind is InitKind.FRAME:
        return frame_seed(state, *frame_widths(state, params, eps, tresca))
    return _laminate_seed(state, params, eps, tresca)


def _band_rows(count: int, n_cells: int) -> np.ndarray:
    count = int(np.clip(count, 1, max(n_cells // 2, 1)))
    return np.floor((np.arange(count) + 0.5) * n_cells / count).astype(int)


def _laminate_seed(state: GridState, params: ModelParams, eps: float, tresca: bool) -> np.ndarray:
    """One-cell bands with the total damaged width of the optimal laminate."""
    xi = state.bc.xi
    weak = _weak_tensor(params, eps, tresca)
    damage = np.zeros((state.ny, state.nx), dtype=np.int8)
    if xi.norm() == 0.0:
        return damage.ravel()

    def fraction(strain: SymMat) -> float:
        return math.sqrt(eps * symcalc.iso_quad(weak, strain) / (2.0 * params.kappa))

    x11, x22, _ = xi.entries
    values = symcalc.eigvals(xi)
    if values[0] * values[-1] > 0:
        for axis, amplitude in ((0, x11), (1, x22)):
            strain = SymMat.diag(amplitude, 0.0) if axis == 0 else SymMat.diag(0.0, amplitude)
            n = state.nx if axis == 0 else state.ny
            bands = _band_rows(round(fraction(strain) * n), n)
            if axis == 0:
                damage[:, bands] = 1
            else:
                damage[bands, :] = 1
    else:
        a, b = symcalc.rank_one_factor(xi)
        axis = int(np.argmax(np.abs(b)))
        n = state.nx if axis == 0 else state.ny
        bands = _band_rows(round(fraction(xi) * n), n)
        if axis == 0:
            damage[:, bands] = 1
        else:
            damage[bands, :] = 1
    return damage.ravel()


def _cell_indices(state: GridState) -> Tuple[np.ndarray, np.ndarray]:
    return np.meshgrid(np.arange(state.nx), np.arange(state.ny), indexing='xy')


def frame_seed(state: GridState, vertical: int, horizontal: int = 0) -> np.ndarray:
    """Damage ``vertical`` cells deep along x = 0, 1 and ``horizontal`` cells deep along y = 0, 1."""
    i, j = _cell_indices(state)
    frame = (i < vertical) | (i >= state.nx - vertical)
    if horizontal > 0:
        frame |= (j < horizontal) | (j >= state.ny - horizontal)
    return frame.astype(np.int8).ravel()


def _edge_mismatch(state: GridState, weak: IsoTensor, points: np.ndarray, normal: Tuple[float, float]) -> float:
    """Mean of weak (d . nu):(d . nu) for the jump d between the boundary data and the value at the center."""
    center = 0.5 * state.h * np.array([[state.nx, state.ny]], dtype=float)
    d = state.bc.values(points) - state.bc.values(center)
    n1, n2 = normal
    e11, e22 = d[:, 0] * n1, d[:, 1] * n2
    e12 = 0.5 * (d[:, 0] * n2 + d[:, 1] * n1)
    quad = weak.lam * (e11 + e22) ** 2 + 2.0 * weak.mu * (e11 ** 2 + e22 ** 2 + 2.0 * e12 ** 2)
    return float(quad.mean())


def frame_widths(state: GridState, params: ModelParams, eps: float, tresca: bool = False) -> Tuple[int, int]:
    """Cell widths of a frame around a rigid interior, balancing layer strain against surface cost.

    A layer of width w carrying the jump d costs weak(d . nu):(d . nu) / (2 w) + kappa w / eps
    per unit length, minimal at w = sqrt(eps q / (2 kappa)).  Top and bottom stay intact under
    lateral clamping.
    """
    weak = _weak_tensor(params, eps, tresca)
    coords = state.node_coords()
    width, height = state.nx * state.h, state.ny * state.h
    tol = 1e-12 * state.h
    left = coords[np.abs(coords[:, 0]) < tol]
    right = coords[np.abs(coords[:, 0] - width) < tol]
    q_side = 0.5 * (_edge_mismatch(state, weak, left, (-1.0, 0.0)) + _edge_mismatch(state, weak, right, (1.0, 0.0)))

    def cells(q: float, n: int) -> int:
        w = math.sqrt(eps * q / (2.0 * params.kappa)) / state.h
        return int(np.clip(round(w), 1, max(n // 4, 1)))

    vertical = cells(q_side, state.nx)
    if state.bc.kind is BoundaryKind.LATERAL:
        return vertical, 0
    bottom = coords[np.abs(coords[:, 1]) < tol]
    top = coords[np.abs(coords[:, 1] - height) < tol]
    q_top = 0.5 * (_edge_mismatch(state, weak, bottom, (0.0, -1.0)) + _edge_mismatch(state, weak, top, (0.0, 1.0)))
    return vertical, cells(q_top, state.ny)


_NORMALS = ((1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (2, -1), (1, 2), (1, -2))
_BAND_COUNTS = (1, 2, 4)
_WIDTH_SCALES = (0.5, 1.0, 2.0)


def nearest_normal(direction: np.ndarray) -> Tuple[int, int]:
    """Lattice normal closest in angle to ``direction``."""
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    return max(_NORMALS, key=lambda n: abs(d[0] * n[0] + d[1] * n[1]) / math.hypot(*n))


def stripes(state: GridState, normal: Tuple[int, int], count: int, fraction: float) -> Optional[np.ndarray]:
    """``count`` evenly spaced digital bands across lattice normal ``normal`` covering about ``fraction`` of the cells.

    Returns None when the bands would fill the grid.
    """
    p, q = normal
    i, j = _cell_indices(state)
    s = p * i + q * j
    s = s - s.min()
    span = int(s.max()) + 1
    width = max(1, int(round(fraction * span / count)))
    if count * width >= span:
        return None
    period = span / count
    phase = np.mod(s + 0.5, period)
    lo = 0.5 * (period - width)
    return ((phase >= lo) & (phase < lo + width)).astype(np.int8).ravel()


def _band_candidates(state: GridState, params: ModelParams, eps: float, tresca: bool) -> List[Tuple[str, np.ndarray]]:
    xi = state.bc.xi
    envelope = envelopes.sq_envelope_tresca if tresca else envelopes.sq_envelope
    theta = envelope(params, eps, xi).theta_opt
    spectrum = symcalc.eigs(xi)
    values = spectrum.eigenvalues
    normals = [(1, 0), (0, 1)]
    candidates = []

    if values[0] * values[-1] > 0:
        weak = _weak_tensor(params, eps, tresca)
        axes = [spectrum.frame[:, k] for k in range(2)]
        demand = [math.sqrt(symcalc.iso_quad(weak, values[k] * symcalc.sym_outer(axes[k], axes[k])))
                  for k in range(2)]
        shares = [theta * d / sum(demand) for d in demand]
        cross = [nearest_normal(axis) for axis in axes]
        for count in (1, 2):
            for scale in _WIDTH_SCALES:
                masks = [stripes(state, n, count, scale * share) for n, share in zip(cross, shares)]
                if any(m is None for m in masks):
                    continue
                candidates.append((f'cross x{count} @{scale}', masks[0] | masks[1]))
    else:
        a, b = symcalc.rank_one_factor(xi)
        for direction in (a, b):
            if np.linalg.norm(direction) > 0:
                normal = nearest_normal(direction)
                if normal not in normals:
                    normals.append(normal)

    for normal in normals:
        for count in _BAND_COUNTS:
            for scale in _WIDTH_SCALES:
                mask = stripes(state, normal, count, scale * theta)
                if mask is not None:
                    candidates.append((f'bands {normal} x{count} @{scale}', mask))
    return candidates


def _frame_candidates(state: GridState, params: ModelParams, eps: float, tresca: bool) -> List[Tuple[str, np.ndarray]]:
    vertical, horizontal = frame_widths(state, params, eps, tresca)
    lateral = state.bc.kind is BoundaryKind.LATERAL
    pairs = [(k, 0 if lateral else k) for k in range(1, max(state.nx // 8, 1) + 1)]
    for dv in (-1, 0, 1):
        for dh in ((0,) if lateral else (-1, 0, 1)):
            pairs.append((max(vertical + dv, 1), 0 if lateral else max(horizontal + dh, 1)))
    return [(f'frame {v},{w}', frame_seed(state, v, w)) for v, w in pairs]


def seed_family(state: GridState, params: ModelParams, eps: float, kind: InitKind = InitKind.UNDAMAGED,
                rng: Optional[np.random.Generator] = None, tresca: bool = False) -> List[Tuple[str, np.ndarray]]:
    """Named starting damage fields, primary seed first, without duplicates.

    Laminate starts add banded fields along lattice normals near the laminate normals;
    frame starts add frames of several widths.  Undamaged and random starts are single.
    """
    kind = InitKind(kind)
    primary = (kind.value, initial_damage(state, params, eps, kind, rng, tresca))
    if kind in (InitKind.UNDAMAGED, InitKind.RANDOM) or state.bc.xi.norm() == 0.0:
        return [primary]
    candidates = [primary, (InitKind.UNDAMAGED.value, np.zeros(state.n_cells, dtype=np.int8))]
    if kind is InitKind.FRAME:
        candidates += _frame_candidates(state, params, eps, tresca)
    else:
        candidates += _band_candidates(state, params, eps, tresca)

    seen, family = set(), []
    for label, damage in candidates:
        key = damage.tobytes()
        if key not in seen:
            seen.add(key)
            family.append((label, damage))
    return family


def alternate_minimize(state: GridState, params: ModelParams, eps: float, tol: Optional[float] = None,
                       max_iters: Optional[int] = None, tresca: bool = False,
                       freeze_damage: bool = False) -> AlternationResult:
    """Alternate elastic solves and exact damage updates until the energy stalls.

    The returned state is the lowest-energy iterate.
    """
    tol = Config.ALTERNATION_TOL if tol is None else tol
    max_iters = Config.ALTERNATION_MAX_ITERS if max_iters is None else max_iters
    state = state.copy()
    trace: List[float] = []
    best: Optional[GridState] = None
    cg_total = 0

    for it in range(max_iters):
        solution = solve_elastic(state, params, eps, tresca)
        state.displacement = solution.displacement
        cg_total += solution.iterations
        energy = discrete_energy(state, params, eps, tresca)
        if trace and energy > trace[-1] * (1.0 + 1e-12) + 1e-300:
            logger.warning(f"Energy increased at iteration {it}: {trace[-1]:.15g} -> {energy:.15g}")
        trace.append(energy)
        if best is None or energy <= min(trace[:-1], default=math.inf):
            best = state.copy()

        if freeze_damage:
            return AlternationResult(best, trace, True, False, cg_total)

        updated = damage_update(state, params, eps, tresca)
        if np.array_equal(updated, state.damage):
            return AlternationResult(best, trace, True, False, cg_total)
        if len(trace) > 1 and trace[-2] - energy <= tol * abs(trace[-2]):
            return AlternationResult(best, trace, True, False, cg_total)
        state.damage = updated

    logger.warning(f"Alternating minimization hit the cap of {max_iters} iterations at eps={eps}")
    return AlternationResult(best, trace, False, True, cg_total)


def multi_start(state: GridState, params: ModelParams, eps: float, family: Sequence[Tuple[str, np.ndarray]],
                tol: Optional[float] = None, max_iters: Optional[int] = None, tresca: bool = False,
                keep: Optional[int] = None) -> AlternationResult:
    """Alternate from the primary seed and from the ``keep`` best-screened others; return the lowest energy.

    Screening is one frozen-damage solve per seed at Config.SEED_SCREEN_CG_TOL.
    """
    keep = Config.SEED_KEEP if keep is None else keep
    (primary_label, primary), others = family[0], list(family[1:])
    screened = []
    for label, damage in others:
        trial = state.copy()
        trial.damage = damage
        trial.displacement = solve_elastic(trial, params, eps, tresca, tol=Config.SEED_SCREEN_CG_TOL).displacement
        screened.append((discrete_energy(trial, params, eps, tresca), label, trial))
    screened.sort(key=lambda item: item[0])

    start = state.copy()
    start.damage = primary
    runs = [(primary_label, start)] + [(label, trial) for _, label, trial in screened[:keep]]
    best: Optional[AlternationResult] = None
    for label, trial in runs:
        result = alternate_minimize(trial, params, eps, tol, max_iters, tresca)
        result.seed = label
        logger.debug(f"Seed {label!r} at eps={eps}: energy {result.energy:.10g}")
        if best is None or result.energy < best.energy:
            best = result
    logger.info(f"Best start at eps={eps}: {best.seed!r} of {len(family)} ({best.energy:.10g})")
    return best


# ---------------------------------------------------------------------------
# Sweeps

_SCHEDULES = {
    Regime.TRIVIAL: EtaKind.TRIVIAL,
    Regime.HENCKY: EtaKind.HENCKY,
    Regime.ELASTIC: EtaKind.ELASTIC,
}


def default_init(regime: Regime, bc_kind: BoundaryKind = BoundaryKind.AFFINE) -> InitKind:
    """Frames around a rigid interior for the trivial regime under full clamping, bands otherwise."""
    regime, bc_kind = Regime(regime), BoundaryKind(bc_kind)
    if regime is Regime.TRIVIAL:
        return InitKind.FRAME if bc_kind is BoundaryKind.AFFINE else InitKind.LAMINATE
    if regime in (Regime.ELASTIC, Regime.TRESCA):
        return InitKind.UNDAMAGED
    return InitKind.LAMINATE


@dataclass(frozen=True)
class _SweepTask:
    params: ModelParams
    bc: BoundaryCondition
    eps: float
    grid: int
    init: InitKind
    tol: Optional[float]
    max_iters: Optional[int]
    seed: int
    tresca: bool


def _run_point(task: _SweepTask) -> AlternationResult:
    state = GridState.unit_square(task.grid, task.bc)
    rng = np.random.default_rng(task.seed)
    family = seed_family(state, task.params, task.eps, task.init, rng, task.tresca)
    logger.info(f"Solving eps={task.eps} on {task.grid}x{task.grid} ({task.init.value} start, {len(family)} seeds)")
    if len(family) == 1:
        state.damage = family[0][1]
        result = alternate_minimize(state, task.params, task.eps, task.tol, task.max_iters, task.tresca)
        result.seed = family[0][0]
        return result
    return multi_start(state, task.params, task.eps, family, task.tol, task.max_iters, task.tresca)


def _sweep(params, bc, eps_list, grid, init, tol, max_iters, jobs, seed, tresca) -> List[AlternationResult]:
    tasks = [_SweepTask(params, bc, float(eps), grid, init, tol, max_iters, seed + k, tresca)
             for k, eps in enumerate(eps_list)]
    return ordered_map(_run_point, tasks, jobs)


def _report(regime: Regime, eps_list: Sequence[float], etas: Sequence[float], results: List[AlternationResult],
            limit: float, model: str = "damage") -> RegimeReport:
    report = RegimeReport(
        regime=regime,
        eps_list=[float(e) for e in eps_list],
        etas=[float(e) for e in etas],
        energies=[r.energy for r in results],
        damaged_volumes=[r.state.damaged_volume() for r in results],
        iterations=[r.iterations for r in results],
        limit_reference=limit,
        seeds=[r.seed for r in results],
        model=model,
        states=[r.state for r in results]
    )
    for eps, r in zip(eps_list, results):
        if r.cap_hit:
            report.flags.append(f"alternation cap hit at eps={eps}")
    return report


def scaling_exponent(etas: Sequence[float], eps_list: Sequence[float], energies: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log E against log sqrt(eta / eps)."""
    energies = np.asarray(energies, dtype=float)
    if len(energies) < 2 or np.any(energies <= 0):
        return None
    x = 0.5 * np.log(np.asarray(etas, dtype=float) / np.asarray(eps_list, dtype=float))
    return float(np.polyfit(x, np.log(energies), 1)[0])


def regime_sweep(params: ModelParams, xi_bc: SymMat, eps_list: Sequence[float], grid: int = 32,
                 regime: Optional[Regime] = None, init: Optional[InitKind] = None,
                 bc_kind: BoundaryKind = BoundaryKind.AFFINE, tol: Optional[float] = None,
                 max_iters: Optional[int] = None, jobs: Optional[int] = None,
                 seed: Optional[int] = None) -> RegimeReport:
    if regime is not None:
        regime = Regime(regime)
        if regime is Regime.TRESCA:
            return tresca_sweep(params, xi_bc, eps_list, grid, init or InitKind.UNDAMAGED, bc_kind,
                                tol, max_iters, jobs, seed)
        if regime is not params.regime:
            params = params.with_schedule(EtaSchedule(_SCHEDULES[regime]))
    regime = params.regime
    init = default_init(regime, bc_kind) if init is None else InitKind(init)
    seed = Config.DEFAULT_SEED if seed is None else seed
    bc = BoundaryCondition(xi_bc, bc_kind)

    results = _sweep(params, bc, eps_list, grid, init, tol, max_iters, jobs, seed, tresca=False)
    area = results[0].state.area if results else 1.0
    etas = [params.eta(eps) for eps in eps_list]

    if regime is Regime.TRIVIAL:
        limit = 0.0
    elif regime is Regime.HENCKY:
        limit = area * envelopes.w_bar(params, xi_bc)
    else:
        limit = area * densities.f_strong(params, xi_bc)

    report = _report(regime, eps_list, etas, results, limit)
    if regime is Regime.TRIVIAL:
        report.scaling_fit = scaling_exponent(etas, eps_list, report.energies)
    if regime is Regime.HENCKY:
        _hencky_brackets(report, params, xi_bc, area)
    logger.info(f"{regime.value} sweep done: energies {report.energies}, reference {limit:.6g}")
    return report


def _hencky_brackets(report: RegimeReport, params: ModelParams, xi: SymMat, area: float):
    """SQW_eps <= E_eps <= HENCKY_UPPER_BRACKET x SQW_eps at every eps."""
    upper = Config.HENCKY_UPPER_BRACKET
    within = True
    for eps, energy in zip(report.eps_list, report.energies):
        sqw = area * envelopes.sq_envelope(params, eps, xi).value
        report.envelope_reference.append(sqw)
        ratio = energy / sqw if sqw > 0 else (1.0 if energy <= 0 else math.inf)
        report.envelope_ratios.append(ratio)
        if energy < sqw * (1.0 - 1e-9) - 1e-12:
            report.flags.append(f"energy {energy:.6g} below relaxed envelope {sqw:.6g} at eps={eps}")
            within = False
        elif ratio > upper:
            report.flags.append(f"energy {energy:.6g} above {upper:g} x envelope {sqw:.6g} at eps={eps}")
            within = False
    report.within_bracket = within
    if not within:
        logger.error(f"Hencky sweep left the envelope bracket: ratios {report.envelope_ratios}")
    ratios = [v / e for v, e in zip(report.damaged_volumes, report.eps_list)]
    report.concentration_constant = max(ratios) if ratios else None


def tresca_sweep(params: ModelParams, xi_bc: SymMat, eps_list: Sequence[float], grid: int = 32,
                 init: InitKind = InitKind.UNDAMAGED, bc_kind: BoundaryKind = BoundaryKind.AFFINE,
                 tol: Optional[float] = None, max_iters: Optional[int] = None,
                 jobs: Optional[int] = None, seed: Optional[int] = None) -> RegimeReport:
    """Same scheme for the Tresca energy, weak tensor (lambda_w, eps mu_w)."""
    params.check_tresca()
    seed = Config.DEFAULT_SEED if seed is None else seed
    bc = BoundaryCondition(xi_bc, bc_kind)
    results = _sweep(params, bc, eps_list, grid, InitKind(init), tol, max_iters, jobs, seed, tresca=True)
    area = results[0].state.area if results else 1.0
    limit = area * envelopes.tresca_limit_bulk(params, xi_bc)
    return _report(Regime.TRESCA, eps_list, eps_list, results, limit, model="tresca")
