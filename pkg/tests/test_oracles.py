import json
import math

import numpy as np
import pytest

from brittle_limit.config import Config, DevelopmentConfig, VerifyConfig
from brittle_limit.models.oracle import OracleReport
from brittle_limit.models.params import ModelParams
from brittle_limit.models.tensors import SymMat
from brittle_limit.services import densities, envelopes, oracles


def test_inf_convolution_of_zero(params):
    estimate = oracles.brute_inf_convolution(params, SymMat.zeros(2))
    assert estimate.value == 0.0
    assert estimate.bound == 0.0


def test_scalar_huber_value():
    assert oracles.scalar_inf_convolution(1.0, 1.0, 3.0) == pytest.approx(2.5, abs=1e-6)
    assert oracles.scalar_inf_convolution(1.0, 1.0, 0.5) == pytest.approx(0.125, abs=1e-6)


@pytest.mark.parametrize('xi', [SymMat.diag(1.0, -0.5), SymMat.diag(2.0, 1.5),
                                SymMat.from_matrix([[0.3, 0.8], [0.8, -0.1]])])
def test_inf_convolution_brackets_w_bar(params, xi):
    reference = envelopes.w_bar(params, xi)
    estimate = oracles.brute_inf_convolution(params, xi, grid_points=401, general_samples=200, seed=5)
    assert estimate.diagonal >= reference * (1.0 - 1e-6) - 1e-9
    assert estimate.diagonal <= reference + estimate.bound
    assert estimate.general >= reference * (1.0 - 1e-6) - 1e-9


def test_sample_strain_near_degenerate_draw(rng):
    xi = oracles.sample_strain(rng, 3, k=3)
    values = np.linalg.eigvalsh(xi.to_matrix())
    assert np.min(np.diff(values)) < 1e-7


class TestConjugates:

    def test_zero(self, params):
        assert oracles.conjugate_bruteforce(params, 'G', SymMat.zeros(2)).value == 0.0

    def test_identity(self, params):
        estimate = oracles.conjugate_bruteforce(params, 'G', SymMat.identity(2))
        assert estimate.reference == pytest.approx(12.0)
        assert estimate.value == pytest.approx(12.0, rel=1e-6)

    def test_deviatoric(self, soft_params):
        xi = SymMat.diag(1.0, -0.4, -0.6)
        estimate = oracles.conjugate_bruteforce(soft_params, 'G_tilde', xi)
        expected = densities.TrescaFamily(soft_params).h_tilde(xi) / 4.0
        assert estimate.value == pytest.approx(expected, rel=1e-6)

    def test_unknown_conjugate(self, params):
        with pytest.raises(ValueError):
            oracles.conjugate_bruteforce(params, 'H', SymMat.identity(2))

    def test_report(self, soft_params):
        report = oracles.conjugate_report(soft_params, 'G', samples=3, seed=11)
        assert report.samples == 3
        assert report.passed


class TestRotationRobustness:

    @pytest.mark.parametrize('op_id', ['w_bar_dual', 'F_eps'])
    def test_isotropy(self, soft_params, op_id):
        report = oracles.rotation_robustness(soft_params, op_id, samples=8, seed=3)
        assert report.name == f'rotation_{op_id}'
        assert report.passed, report.worst_case_input

    def test_unknown_op(self, params):
        with pytest.raises(ValueError):
            oracles.rotation_robustness(params, 'w_eps', samples=1)


class TestConvexityProbe:

    @pytest.mark.parametrize('fn_id', ['w_bar', 'sqrt_h_r'])
    def test_convex_functions(self, soft_params, fn_id):
        report = oracles.convexity_probe(soft_params, fn_id, samples=10, seed=7)
        assert report.passed

    def test_pointwise_density_is_not_convex(self, params):
        report = oracles.convexity_probe(params, 'w_eps', samples=5, seed=7)
        assert report.expect_violation
        assert report.max_abs_gap > 0.0
        assert report.passed

    def test_unknown_function(self, params):
        with pytest.raises(ValueError):
            oracles.convexity_probe(params, 'f_strong')


def test_growth_probe(soft_params):
    report = oracles.growth_probe(soft_params, samples=20, seed=1)
    assert report.passed
    assert set(report.details) == {'c', 'C'}


class TestOracleReport:

    def test_record_keeps_worst_case(self):
        report = OracleReport(name='probe', samples=3, seed=1, tolerance=1e-3)
        report.record(1e-5, 1e-5, {'k': 0})
        report.record(2e-3, 1e-4, {'k': 1})
        report.record(1e-6, 1e-7, {'k': 2})
        assert report.max_abs_gap == 2e-3
        assert report.max_rel_gap == 1e-4
        assert report.worst_case_input == {'k': 1}
        assert report.passed

    def test_expected_violation_inverts_verdict(self):
        report = OracleReport(name='probe', samples=1, tolerance=1e-8, expect_violation=True)
        report.record(0.0, 0.0, {})
        assert not report.passed
        report.record(0.5, 0.5, {})
        assert report.passed

    def test_non_finite_gaps(self):
        with pytest.raises(ValueError):
            OracleReport(name='probe', samples=1, max_abs_gap=math.nan)

    def test_json(self):
        report = OracleReport(name='probe', samples=2, seed=9, tolerance=1e-6)
        report.record(1e-7, 1e-7, {'xi': [1.0, 2.0, 0.0]})
        data = json.loads(report.to_json())
        assert data['name'] == 'probe'
        assert data['seed'] == 9
        assert data['passed'] is True
        assert data['worst_case_input'] == {'xi': [1.0, 2.0, 0.0]}


class TestSuite:

    def test_suite_index(self):
        names = [name for name, _, _, _ in oracles.ORACLE_SUITE]
        assert oracles.suite_index('inf_convolution') == 0
        assert oracles.suite_index(names[-1]) == len(names) - 1
        with pytest.raises(ValueError):
            oracles.suite_index('missing')

    def test_subset_keeps_suite_order_and_seeds(self, params):
        reports = oracles.run_suite(params, samples=10, seed=100, only=['growth', 'conjugate_G'])
        assert [r.name for r in reports] == ['conjugate_G', 'growth']
        assert reports[0].seed == 100 + oracles.suite_index('conjugate_G')
        assert reports[1].seed == 100 + oracles.suite_index('growth')

    def test_reports_are_reproducible(self, params):
        first = oracles.run_suite(params, samples=10, seed=42, only=['growth', 'convexity_w_eps'])
        second = oracles.run_suite(params, samples=10, seed=42, only=['growth', 'convexity_w_eps'])
        assert [r.to_dict() for r in first] == [r.to_dict() for r in second]

    @pytest.mark.slow
    def test_full_suite_passes(self, params):
        reports = oracles.run_suite(params, samples=40, seed=2024)
        failed = [r.name for r in reports if not r.passed]
        assert failed == []

    def test_plan_reads_active_budget(self):
        plan = dict(oracles.suite_plan(cfg=DevelopmentConfig))
        assert plan['growth'] == DevelopmentConfig.ORACLE_SAMPLES
        assert plan['convexity_w_bar'] == 10
        assert plan['conjugate_G'] == 1
        assert dict(oracles.suite_plan(samples=10))['inf_convolution'] == 1
        assert [name for name, _ in oracles.suite_plan(cfg=Config)] == [n for n, _, _, _ in oracles.ORACLE_SUITE]

    def test_plan_raises_counts_to_acceptance(self):
        plan = dict(oracles.suite_plan(samples=20, cfg=VerifyConfig))
        assert plan['inf_convolution'] == 1_000
        assert plan['convexity_w_bar'] == 10_000
        assert plan['convexity_w_tilde'] == 10_000
        assert plan['growth'] == 10_000
        assert plan['characterization'] == 10_000
        assert plan['rotation_F_eps'] == 100
        assert plan['convexity_w_eps'] == 2

    def test_plan_subset(self):
        assert oracles.suite_plan(samples=10, only=['growth']) == [('growth', 10)]

    @pytest.mark.slow
    def test_duality_triple_on_thousand_strains(self, params):
        report = oracles.duality_triple(params, 1_000, seed=11)
        assert report.samples == 1_000
        assert report.passed, report.worst_case_input

    @pytest.mark.slow
    def test_suite_at_acceptance_counts(self, params):
        reports = oracles.run_suite(params, samples=200, seed=2024, cfg=VerifyConfig)
        plan = dict(oracles.suite_plan(samples=200, cfg=VerifyConfig))
        counted = {r.name: r.samples for r in reports if r.name.startswith(('inf_', 'rotation_', 'convexity_', 'growth'))}
        assert counted == {name: n for name, n in plan.items() if name in counted}
        assert len(counted) == 9
        failed = [r.name for r in reports if not r.passed]
        assert failed == []
