import math

import numpy as np
import pytest

from brittle_limit.models.errors import SolverConvergenceError
from brittle_limit.models.grid import BoundaryCondition, BoundaryKind, GridState, InitKind, RegimeReport
from brittle_limit.models.params import EtaKind, EtaSchedule, ModelParams, Regime
from brittle_limit.models.tensors import SymMat
from brittle_limit.services import densities, envelopes, gammalab


def grid(n, xi, kind=BoundaryKind.AFFINE, **bc):
    return GridState.unit_square(n, BoundaryCondition(xi, kind, **bc))


def test_grid_state_validation():
    bc = BoundaryCondition(SymMat.zeros(2))
    with pytest.raises(ValueError):
        GridState(0, 4, 0.25, bc)
    with pytest.raises(ValueError):
        GridState(2, 2, 0.5, bc, damage=np.array([0, 1, 2, 0]))
    with pytest.raises(ValueError):
        BoundaryCondition(SymMat.zeros(3))


def test_lateral_constraint_only_on_vertical_edges():
    state = grid(4, SymMat.zeros(2), BoundaryKind.LATERAL)
    coords = state.node_coords()[state.constrained_nodes()]
    assert set(np.round(coords[:, 0], 12)) == {0.0, 1.0}
    assert len(coords) == 10


class TestElasticSolve:

    @pytest.mark.parametrize('n', [3, 8, 17])
    def test_affine_field_is_exact(self, params, n):
        xi = SymMat.from_matrix([[0.3, -0.1], [-0.1, 0.2]])
        state = grid(n, xi)
        gammalab.elastic_solve(state, params, 0.1)
        expected = state.bc.values(state.node_coords())
        assert np.abs(state.displacement - expected).max() < 1e-12
        energy = gammalab.discrete_energy(state, params, 0.1)
        assert energy == pytest.approx(densities.f_strong(params, xi), rel=1e-12)

    def test_fully_damaged_energy(self, soft_params):
        xi = SymMat.diag(0.4, -0.2)
        eps = 0.05
        state = grid(6, xi)
        state.damage = np.ones(state.n_cells, dtype=np.int8)
        gammalab.elastic_solve(state, soft_params, eps)
        expected = 0.5 * soft_params.eta(eps) * (0.5 * 0.2 ** 2 + 2 * 0.8 * (0.4 ** 2 + 0.2 ** 2)) \
            + soft_params.kappa / eps
        assert gammalab.discrete_energy(state, soft_params, eps) == pytest.approx(expected, rel=1e-9)

    def test_cg_energy_decreases_and_reaches_affine_minimum(self, params, rng):
        xi = SymMat.diag(0.5, 0.25)
        bc = BoundaryCondition(xi)
        state = GridState(12, 12, 1.0 / 12, bc, displacement=np.zeros((13 * 13, 2)),
                          damage=(rng.random(144) < 0.3).astype(np.int8))
        solution = gammalab.solve_elastic(state, params, 0.1)
        trace = solution.trace
        assert solution.iterations > 0
        assert all(b <= a * (1.0 + 1e-12) + 1e-14 for a, b in zip(trace, trace[1:]))
        state.displacement = solution.displacement
        assert trace[-1] == pytest.approx(gammalab.operator_for(state, params, 0.1).energy(state.displacement),
                                          rel=1e-8)

        undamaged = GridState(12, 12, 1.0 / 12, bc, displacement=np.zeros((13 * 13, 2)))
        solved = gammalab.solve_elastic(undamaged, params, 0.1)
        assert solved.trace[-1] == pytest.approx(densities.f_strong(params, xi), rel=1e-8)

    def test_boundary_nodes_match_data(self, params, rng):
        xi = SymMat.diag(0.5, -0.3)
        state = grid(10, xi)
        state.damage = (rng.random(100) < 0.4).astype(np.int8)
        gammalab.elastic_solve(state, params, 0.1)
        mask = state.constrained_nodes()
        expected = state.bc.values(state.node_coords()[mask])
        assert np.array_equal(state.displacement[mask], expected)

    def test_iteration_cap(self, params, rng):
        state = GridState(16, 16, 1.0 / 16, BoundaryCondition(SymMat.diag(1.0, 0.5)),
                          displacement=np.zeros((17 * 17, 2)),
                          damage=(rng.random(256) < 0.5).astype(np.int8))
        with pytest.raises(SolverConvergenceError):
            gammalab.solve_elastic(state, params, 1e-3, max_iters=2)

    def test_rigid_motion_invariance(self, soft_params, rng):
        xi = SymMat.diag(0.6, -0.2)
        damage = (rng.random(100) < 0.3).astype(np.int8)
        plain = grid(10, xi)
        moved = grid(10, xi, shift=(0.3, -0.2), omega=0.1)
        plain.damage = damage.copy()
        moved.damage = damage.copy()
        gammalab.elastic_solve(plain, soft_params, 0.1)
        gammalab.elastic_solve(moved, soft_params, 0.1)
        e_plain = gammalab.discrete_energy(plain, soft_params, 0.1)
        e_moved = gammalab.discrete_energy(moved, soft_params, 0.1)
        assert e_moved == pytest.approx(e_plain, rel=1e-9)
        coords = plain.node_coords()
        rigid = np.array([0.3, -0.2]) + 0.1 * np.column_stack([-coords[:, 1], coords[:, 0]])
        assert np.abs(moved.displacement - plain.displacement - rigid).max() < 1e-7


class TestDamageUpdate:

    def test_zero_strain(self, params):
        state = grid(8, SymMat.zeros(2))
        assert not gammalab.damage_update(state, params, 0.01).any()

    def test_below_threshold_stays_undamaged(self, params):
        xi = SymMat.diag(1.0, 0.5)
        eps = 0.1
        assert densities.f_strong(params, xi) < densities.g_weak(params, eps, xi)
        state = grid(8, xi)
        assert not gammalab.damage_update(state, params, eps).any()

    def test_above_threshold_damages_everything(self, params):
        xi = SymMat.diag(3.0, 3.0)
        eps = 0.1
        assert densities.f_strong(params, xi) > densities.g_weak(params, eps, xi)
        state = grid(4, xi)
        assert gammalab.damage_update(state, params, eps).all()

    def test_single_flips_never_help(self, params, rng):
        eps = 0.1
        state = grid(8, SymMat.diag(3.0, -1.0))
        state.damage = (rng.random(64) < 0.3).astype(np.int8)
        gammalab.elastic_solve(state, params, eps)
        state.damage = gammalab.damage_update(state, params, eps)
        base = gammalab.discrete_energy(state, params, eps)
        for cell in range(state.n_cells):
            flipped = state.copy()
            flipped.damage[cell] = 1 - flipped.damage[cell]
            assert gammalab.discrete_energy(flipped, params, eps) >= base * (1.0 - 1e-12)


class TestAlternateMinimize:

    def test_frozen_damage_is_single_solve(self, params):
        xi = SymMat.diag(0.4, 0.1)
        result = gammalab.alternate_minimize(grid(8, xi), params, 0.1, freeze_damage=True)
        assert len(result.trace) == 1
        assert result.energy == pytest.approx(densities.f_strong(params, xi), rel=1e-12)

    def test_energy_never_increases(self, params, rng):
        state = grid(16, SymMat.diag(2.0, -1.0))
        state.damage = (rng.random(256) < 0.2).astype(np.int8)
        result = gammalab.alternate_minimize(state, params, 0.1)
        trace = result.trace
        assert all(b <= a * (1.0 + 1e-10) for a, b in zip(trace, trace[1:]))
        assert result.energy == min(trace)
        assert not result.cap_hit

    def test_does_not_modify_input(self, params, rng):
        state = grid(8, SymMat.diag(2.0, -1.0))
        damage = (rng.random(64) < 0.2).astype(np.int8)
        state.damage = damage.copy()
        gammalab.alternate_minimize(state, params, 0.1)
        assert np.array_equal(state.damage, damage)

    def test_cap_is_flagged(self, params, rng):
        state = grid(16, SymMat.diag(2.0, -1.0))
        state.damage = (rng.random(256) < 0.5).astype(np.int8)
        result = gammalab.alternate_minimize(state, params, 0.1, tol=0.0, max_iters=1)
        assert result.cap_hit
        assert not result.converged
        assert len(result.trace) == 1

    def test_stays_above_relaxed_envelope(self, params):
        xi = SymMat.diag(2.0, -1.0)
        eps = 0.1
        state = grid(16, xi)
        state.damage = gammalab.initial_damage(state, params, eps, InitKind.LAMINATE)
        result = gammalab.alternate_minimize(state, params, eps)
        assert result.energy >= envelopes.sq_envelope(params, eps, xi).value * (1.0 - 1e-6)


class TestInitialDamage:

    def test_undamaged(self, params):
        state = grid(8, SymMat.diag(1.0, 1.0))
        assert not gammalab.initial_damage(state, params, 0.1, InitKind.UNDAMAGED).any()

    def test_random_is_seeded(self, params):
        state = grid(32, SymMat.diag(1.0, 1.0))
        first = gammalab.initial_damage(state, params, 0.1, InitKind.RANDOM, np.random.default_rng(3))
        second = gammalab.initial_damage(state, params, 0.1, InitKind.RANDOM, np.random.default_rng(3))
        assert np.array_equal(first, second)
        assert 0 < first.sum() < 0.15 * state.n_cells

    def test_laminate_seed_shear_bands(self, params):
        state = grid(32, SymMat.from_matrix([[0.0, 1.0], [1.0, 0.0]]))
        damage = gammalab.initial_damage(state, params, 0.1, InitKind.LAMINATE).reshape(32, 32)
        rows = damage.all(axis=1) | damage.all(axis=0)
        assert damage.any()
        assert rows.any()

    def test_laminate_seed_of_zero_strain(self, params):
        state = grid(8, SymMat.zeros(2))
        assert not gammalab.initial_damage(state, params, 0.1, InitKind.LAMINATE).any()

    def test_frame_seed(self, params):
        state = grid(16, SymMat.identity(2))
        damage = gammalab.frame_seed(state, 2, 1).reshape(16, 16)
        assert damage[:, [0, 1, 14, 15]].all()
        assert damage[[0, 15], :].all()
        assert not damage[1:15, 2:14].any()
        lateral = gammalab.frame_seed(grid(16, SymMat.identity(2), BoundaryKind.LATERAL), 2).reshape(16, 16)
        assert not lateral[:, 2:14].any()

    def test_frame_widths_follow_edge_jumps(self, params):
        xi = SymMat.diag(1.5, 0.0)
        vertical, horizontal = gammalab.frame_widths(grid(32, xi), params, 0.1)
        assert (vertical, horizontal) == (3, 1)
        assert gammalab.frame_widths(grid(32, xi, BoundaryKind.LATERAL), params, 0.1) == (3, 0)
        vertical, horizontal = gammalab.frame_widths(grid(32, SymMat.identity(2)), params, 0.1)
        assert vertical == horizontal
        state = grid(32, SymMat.identity(2))
        assert np.array_equal(gammalab.initial_damage(state, params, 0.1, InitKind.FRAME),
                              gammalab.frame_seed(state, vertical, horizontal))

    def test_stripes(self):
        state = grid(32, SymMat.zeros(2))
        damage = gammalab.stripes(state, (1, 0), 2, 0.25).reshape(32, 32)
        columns = damage.all(axis=0)
        assert columns.sum() == 8
        assert damage.sum() == 8 * 32
        oblique = gammalab.stripes(state, (2, 1), 2, 0.25)
        assert abs(oblique.mean() - 0.25) < 0.1
        assert gammalab.stripes(state, (1, 0), 4, 1.0) is None

    def test_nearest_normal(self):
        assert gammalab.nearest_normal([1.0, 0.5]) == (2, 1)
        assert gammalab.nearest_normal([0.0, -3.0]) == (0, 1)
        assert gammalab.nearest_normal([1.0, -1.0]) == (1, -1)

    def test_seed_family(self, params):
        state = grid(16, SymMat.diag(2.0, -1.0))
        family = gammalab.seed_family(state, params, 0.1, InitKind.LAMINATE)
        labels = [label for label, _ in family]
        assert labels[0] == 'laminate'
        assert np.array_equal(family[0][1], gammalab.initial_damage(state, params, 0.1, InitKind.LAMINATE))
        assert 'undamaged' in labels
        assert any(label.startswith('bands (2, 1)') for label in labels)
        assert any(label.startswith('bands (2, -1)') for label in labels)
        assert len({damage.tobytes() for _, damage in family}) == len(family)

    def test_single_seed_families(self, params):
        state = grid(8, SymMat.diag(1.0, 1.0))
        assert len(gammalab.seed_family(state, params, 0.1, InitKind.UNDAMAGED)) == 1
        assert len(gammalab.seed_family(grid(8, SymMat.zeros(2)), params, 0.1, InitKind.LAMINATE)) == 1
        frames = gammalab.seed_family(state, params, 0.1, InitKind.FRAME)
        assert frames[0][0] == 'frame'
        assert all(label.startswith(('frame', 'undamaged')) for label, _ in frames)

    def test_multi_start_keeps_lowest_energy(self, params):
        xi = SymMat.diag(2.0, -1.0)
        eps = 0.1
        state = grid(8, xi)
        family = gammalab.seed_family(state, params, eps, InitKind.LAMINATE)
        result = gammalab.multi_start(state, params, eps, family, keep=2)
        start = state.copy()
        start.damage = family[0][1]
        primary = gammalab.alternate_minimize(start, params, eps)
        assert result.energy <= primary.energy * (1.0 + 1e-12)
        assert result.seed in [label for label, _ in family]
        assert result.energy >= envelopes.sq_envelope(params, eps, xi).value * (1.0 - 1e-6)


def test_scaling_exponent_of_exact_power_law():
    eps = np.array([0.2, 0.1, 0.05])
    etas = eps ** 2
    energies = 3.0 * np.sqrt(etas / eps)
    assert gammalab.scaling_exponent(etas, eps, energies) == pytest.approx(1.0, abs=1e-10)
    assert gammalab.scaling_exponent(etas[:1], eps[:1], energies[:1]) is None
    assert gammalab.scaling_exponent(etas, eps, [1.0, 0.0, 1.0]) is None


class TestRegimeSweep:

    def test_elastic_regime_matches_strong_energy(self, params):
        xi = SymMat.diag(0.5, 0.5)
        report = gammalab.regime_sweep(params, xi, [1e-3], grid=64, regime=Regime.ELASTIC)
        assert report.regime is Regime.ELASTIC
        assert report.etas == [pytest.approx(math.sqrt(1e-3))]
        assert report.limit_reference == pytest.approx(densities.f_strong(params, xi))
        assert report.energies[0] == pytest.approx(report.limit_reference, rel=0.05)
        assert report.damaged_volumes == [0.0]

    def test_report_frame_columns(self, params):
        report = gammalab.regime_sweep(params, SymMat.diag(0.2, 0.1), [0.1, 0.05], grid=8, regime='elastic')
        frame = report.to_frame()
        assert list(frame.columns) == ['eps', 'eta', 'iters', 'energy', 'damaged_volume', 'limit_reference']
        assert len(frame) == 2
        assert report.to_dict()['regime'] == 'elastic'

    def test_hencky_reference_is_w_bar(self, params):
        xi = SymMat.diag(0.3, -0.1)
        report = gammalab.regime_sweep(params, xi, [0.1], grid=8, regime=Regime.HENCKY)
        assert report.limit_reference == pytest.approx(envelopes.w_bar(params, xi))
        assert len(report.envelope_reference) == 1
        assert report.concentration_constant is not None
        assert len(report.envelope_ratios) == 1
        assert report.within_bracket is not None
        assert report.seeds[0] is not None

    @pytest.mark.slow
    def test_trivial_regime_scaling(self):
        params = ModelParams(kappa=0.5, eta_schedule=EtaSchedule(EtaKind.TRIVIAL))
        report = gammalab.regime_sweep(params, SymMat.diag(1.5, 0.0), [0.2, 0.1, 0.05], grid=64,
                                       bc_kind=BoundaryKind.LATERAL)
        assert report.limit_reference == 0.0
        assert all(e >= 0.0 and math.isfinite(e) for e in report.energies)
        assert report.energies == sorted(report.energies, reverse=True)
        assert report.scaling_fit == pytest.approx(1.0, abs=0.2)

    @pytest.mark.slow
    def test_hencky_lower_bracket(self, params):
        xi = SymMat.diag(2.0, -1.0)
        report = gammalab.regime_sweep(params, xi, [0.1, 0.05], grid=32, regime=Regime.HENCKY)
        for energy, sqw in zip(report.energies, report.envelope_reference):
            assert energy >= sqw * (1.0 - 1e-6)
        assert not any('below relaxed envelope' in flag for flag in report.flags)

    def test_default_init(self):
        assert gammalab.default_init(Regime.TRIVIAL) is InitKind.FRAME
        assert gammalab.default_init(Regime.TRIVIAL, BoundaryKind.LATERAL) is InitKind.LAMINATE
        assert gammalab.default_init('hencky') is InitKind.LAMINATE
        assert gammalab.default_init(Regime.ELASTIC) is InitKind.UNDAMAGED

    def test_bracket_verdict(self, params):
        xi = SymMat.diag(2.0, -1.0)
        sqw = envelopes.sq_envelope(params, 0.1, xi).value
        for factor, within in ((1.05, True), (1.2, False), (0.5, False)):
            report = RegimeReport(regime=Regime.HENCKY, eps_list=[0.1], etas=[0.1], energies=[factor * sqw],
                                  damaged_volumes=[0.01], iterations=[1], limit_reference=0.0)
            gammalab._hencky_brackets(report, params, xi, 1.0)
            assert report.within_bracket is within
            assert report.envelope_ratios == [pytest.approx(factor)]
            assert bool(report.flags) is not within
            assert report.to_dict()['within_bracket'] is within

    @pytest.mark.slow
    @pytest.mark.parametrize('xi, eps_list', [
        (SymMat.from_matrix([[0.0, 0.75], [0.75, 0.0]]), [0.1, 0.05, 0.02]),
        (SymMat.diag(1.5, 1.0), [0.1, 0.05]),
    ])
    def test_hencky_upper_bracket(self, params, xi, eps_list):
        report = gammalab.regime_sweep(params, xi, eps_list, grid=64, regime=Regime.HENCKY)
        for energy, sqw in zip(report.energies, report.envelope_reference):
            assert sqw * (1.0 - 1e-6) <= energy <= 1.15 * sqw
        assert report.within_bracket

    @pytest.mark.slow
    def test_trivial_regime_scaling_clamped(self):
        params = ModelParams(kappa=0.06, eta_schedule=EtaSchedule(EtaKind.TRIVIAL))
        report = gammalab.regime_sweep(params, SymMat.identity(2), [0.1, 0.08, 0.064, 0.05], grid=64)
        assert all(seed.startswith(('frame', 'undamaged')) for seed in report.seeds)
        assert all(v > 0.0 for v in report.damaged_volumes)
        assert report.energies == sorted(report.energies, reverse=True)
        assert report.scaling_fit == pytest.approx(1.0, abs=0.2)


class TestTrescaSweep:

    def test_zero_strain(self, params):
        report = gammalab.tresca_sweep(params, SymMat.zeros(2), [0.1], grid=4)
        assert report.energies == [0.0]
        assert report.limit_reference == pytest.approx(0.0, abs=1e-12)
        assert report.model == 'tresca'
        assert report.regime is Regime.TRESCA
        assert report.to_dict()['regime'] == 'tresca'

    def test_regime_sweep_delegates(self, params):
        report = gammalab.regime_sweep(params, SymMat.identity(2), [0.1], grid=4, regime='tresca')
        assert report.regime is Regime.TRESCA
        assert report.model == 'tresca'
        assert report.seeds == ['undamaged']
        assert report.limit_reference == pytest.approx(envelopes.tresca_limit_bulk(params, SymMat.identity(2)))

    def test_spherical_strain_never_damages(self, params):
        xi = SymMat.identity(2)
        report = gammalab.tresca_sweep(params, xi, [0.1, 0.05], grid=8)
        assert report.damaged_volumes == [0.0, 0.0]
        assert report.limit_reference == pytest.approx(envelopes.tresca_limit_bulk(params, xi), rel=1e-12)
        for energy in report.energies:
            assert energy == pytest.approx(report.limit_reference, rel=1e-9)

    def test_requires_ordered_lame_constants(self):
        params = ModelParams(lambda_w=2.0, lambda_s=1.0)
        with pytest.raises(ValueError):
            gammalab.tresca_sweep(params, SymMat.identity(2), [0.1], grid=4)
