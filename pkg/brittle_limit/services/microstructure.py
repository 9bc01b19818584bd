"""Laminate recovery sequences on the unit square and their exact energies.

Case 1 superposes two staircases u = (u^1(x_1), u^2(x_2)) for a diagonal
strain with same-sign eigenvalues.  Case 2 stacks a single staircase along
b for a rank-one strain a (.) b.  Fields are piecewise affine, so every
energy below is a closed-form sum over strips, never a quadrature.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from brittle_limit.models.laminate import (
    LaminateCase, LaminateSpec, LaminateResult, BandStrip, StaircaseProfile, JumpSegment
)
from brittle_limit.models.params import ModelParams, EtaSchedule
from brittle_limit.models.tensors import SymMat
from brittle_limit.services import symcalc, densities, envelopes

logger = logging.getLogger(__name__)


def _hencky(params: ModelParams) -> ModelParams:
    # laminates are built along eta = alpha eps
    return params.with_schedule(EtaSchedule())


def _centers(n_layers: int) -> np.ndarray:
    return np.arange(1, n_layers + 1) / (n_layers + 1.0)


def _half_width(amplitude: float, modulus: float, params: ModelParams, eps: float, n_layers: int) -> float:
    """delta = |xi| sqrt(alpha A) / (2 sqrt(2 kappa)) * eps / (N + 1)."""
    delta = amplitude * math.sqrt(params.alpha * modulus) / (2.0 * math.sqrt(2.0 * params.kappa)) * eps / (n_layers + 1)
    if 2.0 * delta >= 1.0 / (n_layers + 1):
        raise ValueError(
            f"Strips of half-width {delta:.4g} overlap for N={n_layers}; decrease eps or the strain amplitude")
    return delta


class _ChordLength:
    """Length of the chords {x in [0,1]^2 : x.nu = p} and its running integral."""

    def __init__(self, nu: np.ndarray):
        corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]) @ nu
        self.q = np.sort(corners)
        self.peak = 1.0 / max(abs(nu[0]), abs(nu[1]))

    @property
    def p_min(self) -> float:
        return float(self.q[0])

    @property
    def span(self) -> float:
        return float(self.q[3] - self.q[0])

    def cumulative(self, p: float) -> float:
        q0, q1, q2, q3 = self.q
        peak = self.peak
        if p <= q0:
            return 0.0
        if p >= q3:
            return 1.0
        if p <= q1:
            return peak * (p - q0) ** 2 / (2.0 * (q1 - q0))
        if p <= q2:
            return peak * (0.5 * (q1 - q0) + (p - q1))
        return 1.0 - peak * (q3 - p) ** 2 / (2.0 * (q3 - q2))


@dataclass(frozen=True, eq=False)
class LaminateField:
    """The displacement u_eps and damaged set D_eps of one construction."""
    spec: LaminateSpec
    profiles: Tuple[StaircaseProfile, ...]
    a: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None
    chord: Optional[_ChordLength] = None

    def _coordinate(self, points: np.ndarray) -> np.ndarray:
        nu = self.b / np.linalg.norm(self.b)
        return (points @ nu - self.chord.p_min) / self.chord.span

    def displacement(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.spec.case is LaminateCase.ONE:
            return np.column_stack([self.profiles[0](points[:, 0]), self.profiles[1](points[:, 1])])
        if self.b is None:
            return np.zeros_like(points)
        scale = self.chord.span * np.linalg.norm(self.b)
        offset = self.chord.p_min * np.linalg.norm(self.b)
        w = self.profiles[0](self._coordinate(points))
        return np.outer(scale * w + offset, self.a)

    def damaged(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.spec.case is LaminateCase.ONE:
            return self.profiles[0].inside(points[:, 0]) | self.profiles[1].inside(points[:, 1])
        if self.b is None:
            return np.zeros(len(points), dtype=bool)
        return self.profiles[0].inside(self._coordinate(points))

    def strain(self, points) -> np.ndarray:
        """Packed strains (e11, e22, e12) at ``points``."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.spec.case is LaminateCase.ONE:
            e11 = self.profiles[0].derivative(points[:, 0])
            e22 = self.profiles[1].derivative(points[:, 1])
            return np.column_stack([e11, e22, np.zeros(len(points))])
        if self.b is None:
            return np.zeros((len(points), 3))
        xi = symcalc.sym_outer(self.a, self.b).to_array()
        return np.outer(self.profiles[0].derivative(self._coordinate(points)), xi)


def _resolve_rank_one(spec: LaminateSpec) -> Tuple[np.ndarray, np.ndarray]:
    if spec.a is not None and spec.b is not None:
        return spec.a, spec.b
    if spec.xi is None:
        raise ValueError("Case 2 needs either (a, b) or a rank-one representable xi")
    return symcalc.rank_one_factor(spec.xi)


def build_laminate(spec: LaminateSpec) -> LaminateField:
    params = _hencky(spec.params)
    N = spec.n_layers
    centers = _centers(N)

    if spec.case is LaminateCase.ONE:
        xi = spec.xi
        if xi is None:
            raise ValueError("Case 1 needs a diagonal strain xi")
        if abs(xi.entries[2]) > 1e-14 * (1.0 + xi.norm()):
            raise ValueError(f"Case 1 needs a diagonal strain, got off-diagonal {xi.entries[2]}")
        x1, x2 = xi.entries[0], xi.entries[1]
        if not x1 * x2 > 0:
            raise ValueError(
                f"Case 1 needs eigenvalues of the same sign, got ({x1}, {x2}); use Case 2 for a (.) b")
        axial = params.lambda_w + 2.0 * params.mu_w
        profiles = tuple(
            StaircaseProfile(centers, _half_width(abs(x), axial, params, spec.eps, N), x / (N + 1.0))
            for x in (x1, x2)
        )
        return LaminateField(spec, profiles)

    a, b = _resolve_rank_one(spec)
    if np.linalg.norm(a) == 0.0 or np.linalg.norm(b) == 0.0:
        return LaminateField(spec, (StaircaseProfile(np.zeros(0), 0.0, 0.0),))
    shear = symcalc.sym_outer(a, b)
    delta = _half_width(1.0, densities.h_density(params, shear), params, spec.eps, N)
    profile = StaircaseProfile(centers, delta, 1.0 / (N + 1.0))
    return LaminateField(spec, (profile,), a=a, b=b, chord=_ChordLength(b / np.linalg.norm(b)))


def _case_one_energy(field: LaminateField, params: ModelParams, eps: float) -> Tuple[float, float]:
    eta = params.eta(eps)
    toughness = params.kappa / eps
    p1, p2 = field.profiles
    m1, m2 = p1.measure, p2.measure
    k1, k2 = p1.slope, p2.slope
    axial = params.lambda_w + 2.0 * params.mu_w

    single_1 = m1 * (1.0 - m2) * (0.5 * eta * axial * k1 ** 2 + toughness)
    single_2 = m2 * (1.0 - m1) * (0.5 * eta * axial * k2 ** 2 + toughness)
    both = SymMat.diag(k1, k2)
    crossing = m1 * m2 * (0.5 * eta * symcalc.iso_quad(params.A_w, both) + toughness)
    return single_1 + single_2 + crossing, m1 + m2 - m1 * m2


def _case_two_energy(field: LaminateField, params: ModelParams, eps: float) -> Tuple[float, float]:
    profile = field.profiles[0]
    if profile.delta <= 0.0:
        return 0.0, 0.0
    chord = field.chord
    area = 0.0
    for c in profile.centers:
        lo = chord.p_min + chord.span * (c - profile.delta)
        hi = chord.p_min + chord.span * (c + profile.delta)
        area += chord.cumulative(hi) - chord.cumulative(lo)
    shear = symcalc.sym_outer(field.a, field.b)
    density = 0.5 * params.eta(eps) * symcalc.iso_quad(params.A_w, shear) * profile.slope ** 2 + params.kappa / eps
    return area * density, area


def _bands(field: LaminateField) -> List[BandStrip]:
    if field.spec.case is LaminateCase.ONE:
        names = ('x1', 'x2')
    else:
        names = ('b',)
    return [BandStrip(name, float(c), 2.0 * p.delta)
            for name, p in zip(names, field.profiles) for c in p.centers if p.delta > 0]


def laminate_energy(spec: LaminateSpec) -> LaminateResult:
    """Exact E_eps(u_eps, chi_D) of the construction and the limit sqrt(2 alpha kappa h(xi))."""
    params = _hencky(spec.params)
    field = build_laminate(spec)
    if spec.case is LaminateCase.ONE:
        energy, volume = _case_one_energy(field, params, spec.eps)
        xi = spec.xi
        slack = max(p.measure for p in field.profiles)
    else:
        energy, volume = _case_two_energy(field, params, spec.eps)
        xi = symcalc.sym_outer(field.a, field.b) if field.a is not None else SymMat.zeros(2)
        # ratio of the exact strip area to the axis-aligned value 2 N delta
        profile = field.profiles[0]
        slack = max(volume / profile.measure - 1.0, 0.0) if profile.measure > 0 else 0.0

    result = LaminateResult(
        case=spec.case,
        eps=spec.eps,
        n_layers=spec.n_layers,
        delta=tuple(p.delta for p in field.profiles),
        energy=energy,
        damaged_volume=volume,
        limit_bound=densities.support_K(params, xi),
        bands=_bands(field),
        slack=slack
    )
    logger.debug(f"Laminate {result}")
    return result


def laminate_sweep(base: LaminateSpec, eps_list: Sequence[float]) -> List[LaminateResult]:
    """Evaluate the construction along eps with N_eps = ceil(eps^(-1/2))."""
    results = []
    for eps in eps_list:
        spec = LaminateSpec(base.case, eps, LaminateSpec.default_layers(eps), base.params,
                            xi=base.xi, a=base.a, b=base.b)
        results.append(laminate_energy(spec))
    return results


def strain_off_damage(field: LaminateField, resolution: int = 256) -> float:
    """Midpoint-rule integral of |e(u_eps)| over Q minus D_eps."""
    axis = (np.arange(resolution) + 0.5) / resolution
    X, Y = np.meshgrid(axis, axis, indexing='ij')
    points = np.column_stack([X.ravel(), Y.ravel()])
    strain = field.strain(points)
    norms = np.sqrt(strain[:, 0] ** 2 + strain[:, 1] ** 2 + 2.0 * strain[:, 2] ** 2)
    outside = ~field.damaged(points)
    return float(norms[outside].sum() / resolution ** 2)


def bands_frame(result: LaminateResult) -> pd.DataFrame:
    return pd.DataFrame([band.to_dict() for band in result.bands], columns=['direction', 'center', 'width'])


def limit_energy_piecewise(params: ModelParams, strains: Sequence[SymMat], weights, jumps: Sequence[JumpSegment],
                           tresca: bool = False) -> float:
    """Limit energy of a piecewise-smooth field.

    Bulk part is sum_k weights_k W(e_k) with W = W_bar (or the Tresca bulk
    density); each jump segment adds length * sqrt(2 alpha kappa A_w([u](.)nu):([u](.)nu)),
    or length * sqrt(2 kappa h~([u](.)nu)) in the Tresca model, where jumps
    must be orthogonal to their normal.
    """
    weights = np.asarray(weights, dtype=float)
    if len(weights) != len(strains):
        raise ValueError(f"{len(strains)} strains but {len(weights)} quadrature weights")

    if tresca:
        bulk = sum(w * envelopes.tresca_limit_bulk(params, e) for w, e in zip(weights, strains))
    else:
        bulk = sum(w * envelopes.w_bar(params, e) for w, e in zip(weights, strains))

    singular = 0.0
    family = densities.TrescaFamily(params) if tresca else None
    for segment in jumps:
        jump_strain = symcalc.sym_outer(segment.jump, segment.normal)
        if tresca:
            opening = float(segment.jump @ segment.normal)
            if abs(opening) > 1e-12 * (1.0 + np.linalg.norm(segment.jump)):
                raise ValueError(f"Tresca jumps must satisfy [u].nu = 0, got {opening}")
            slope = family.support_K_tilde(symcalc.dev_split(jump_strain)[1])
        else:
            slope = math.sqrt(2.0 * params.alpha * params.kappa * symcalc.iso_quad(params.A_w, jump_strain))
        singular += segment.length * slope
    return float(bulk + singular)
