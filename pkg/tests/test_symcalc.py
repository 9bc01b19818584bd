import math

import numpy as np
import pytest

from brittle_limit.models.errors import NonInvertibleError
from brittle_limit.models.tensors import SymMat, IsoTensor
from brittle_limit.services import symcalc


def _reconstruction_error(xi):
    spectrum = symcalc.eigs(xi)
    return np.abs(spectrum.reconstruct().to_matrix() - xi.to_matrix()).max() / (1.0 + xi.norm())


def test_eigs_of_diagonal():
    assert symcalc.eigs(SymMat.diag(2.0, 1.0)).eigenvalues.tolist() == [1.0, 2.0]


def test_eigs_of_zero_three_by_three():
    spectrum = symcalc.eigs(SymMat.zeros(3))
    assert spectrum.eigenvalues.tolist() == [0.0, 0.0, 0.0]
    assert np.allclose(spectrum.frame.T @ spectrum.frame, np.eye(3))


def test_eigs_of_symmetric_product():
    values = symcalc.eigvals(symcalc.sym_outer([1.0, 0.0], [0.0, 1.0]))
    assert values == pytest.approx([-0.5, 0.5], abs=1e-15)


@pytest.mark.parametrize('dim', [2, 3])
def test_eigs_reconstructs_random_matrices(dim, rng):
    for _ in range(200):
        xi = symcalc.random_symmat(dim, rng, scale=10.0 ** rng.uniform(-3, 3))
        spectrum = symcalc.eigs(xi)
        assert np.all(np.diff(spectrum.eigenvalues) >= 0)
        assert np.abs(spectrum.frame.T @ spectrum.frame - np.eye(dim)).max() < 1e-12
        assert _reconstruction_error(xi) < 1e-12


@pytest.mark.parametrize('gap', [1e-3, 1e-6, 1e-9, 0.0])
def test_eigs_near_degenerate_spectra(gap, rng):
    rotation = symcalc.random_rotation(3, rng)
    xi = symcalc.rotate(SymMat.diag(1.0, 1.0 + gap, 3.0), rotation)
    assert symcalc.eigvals(xi) == pytest.approx([1.0, 1.0 + gap, 3.0], abs=1e-12)
    assert _reconstruction_error(xi) < 1e-12


def test_sym_outer_examples():
    assert symcalc.sym_outer([1.0, 0.0], [1.0, 0.0]).entries == (1.0, 0.0, 0.0)
    assert symcalc.sym_outer([1.0, 0.0], [0.0, 1.0]).entries == (0.0, 0.0, 0.5)


def test_sym_outer_rejects_mismatched_vectors():
    with pytest.raises(ValueError):
        symcalc.sym_outer([1.0, 0.0], [1.0, 0.0, 0.0])


@pytest.mark.parametrize('dim', [2, 3])
def test_symmetric_products_have_opposite_signs(dim, rng):
    for _ in range(500):
        values = symcalc.eigvals(symcalc.sym_outer(rng.standard_normal(dim), rng.standard_normal(dim)))
        scale = np.abs(values).max()
        if dim == 3:
            assert abs(values[1]) <= 1e-12 * scale
        assert values[0] * values[-1] <= 1e-12 * scale ** 2


def test_cofactor_examples():
    assert symcalc.cofactor(SymMat.diag(1.0, 2.0, 3.0)).entries == pytest.approx((6.0, 3.0, 2.0, 0.0, 0.0, 0.0))
    assert symcalc.cofactor(SymMat.identity(3)).entries == pytest.approx(SymMat.identity(3).entries)


def test_cofactor_rejects_two_dimensions():
    with pytest.raises(ValueError):
        symcalc.cofactor(SymMat.identity(2))


def test_cofactor_commutes_with_rotations(rng):
    for _ in range(100):
        xi = symcalc.random_symmat(3, rng)
        rotation = symcalc.random_rotation(3, rng)
        lhs = symcalc.cofactor(symcalc.rotate(xi, rotation)).to_matrix()
        rhs = symcalc.rotate(symcalc.cofactor(xi), rotation).to_matrix()
        assert np.abs(lhs - rhs).max() < 1e-12 * (1.0 + xi.norm() ** 2)


def test_cofactor_eigenvalues_are_pair_products(rng):
    xi = symcalc.random_symmat(3, rng)
    v = symcalc.eigvals(xi)
    expected = sorted([v[1] * v[2], v[0] * v[2], v[0] * v[1]])
    assert symcalc.eigvals(symcalc.cofactor(xi)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize('xi, trace, deviator', [
    (SymMat.identity(2), 2.0, (0.0, 0.0, 0.0)),
    (SymMat.diag(1.0, -1.0), 0.0, (1.0, -1.0, 0.0)),
    (SymMat.diag(3.0, 0.0, 0.0), 3.0, (2.0, -1.0, -1.0, 0.0, 0.0, 0.0)),
])
def test_dev_split(xi, trace, deviator):
    t, xi_D = symcalc.dev_split(xi)
    assert t == pytest.approx(trace)
    assert xi_D.entries == pytest.approx(deviator, abs=1e-14)


def test_iso_quad_examples():
    C = IsoTensor(1.0, 1.0)
    assert symcalc.iso_quad(C, SymMat.identity(2)) == pytest.approx(8.0)
    assert symcalc.iso_quad(C, SymMat.zeros(3)) == 0.0
    assert symcalc.iso_quad(IsoTensor(3.0, 0.7), symcalc.sym_outer([1.0, 0.0], [0.0, 1.0])) == pytest.approx(0.7)


def test_apply_iso_is_symmetric_bilinear(rng):
    C = IsoTensor(1.7, 0.4)
    xi, eta = symcalc.random_symmat(3, rng), symcalc.random_symmat(3, rng)
    assert symcalc.apply_iso(C, xi).ddot(eta) == pytest.approx(symcalc.apply_iso(C, eta).ddot(xi), rel=1e-13)
    assert symcalc.apply_iso(C, xi).ddot(xi) == pytest.approx(symcalc.iso_quad(C, xi), rel=1e-13)


@pytest.mark.parametrize('dim', [2, 3])
def test_iso_inverse_round_trip(dim, rng):
    C = IsoTensor(2.3, 0.9)
    for _ in range(50):
        tau = symcalc.random_symmat(dim, rng)
        back = symcalc.apply_iso(C, symcalc.iso_inverse_apply(C, tau))
        assert back.entries == pytest.approx(tau.entries, rel=1e-12, abs=1e-12)


def test_iso_inverse_on_spherical_and_deviatoric_parts():
    C = IsoTensor(2.0, 1.5)
    assert symcalc.iso_inverse_apply(C, SymMat.identity(3)).entries == pytest.approx(
        (SymMat.identity(3) * (1.0 / (3 * 2.0 + 3.0))).entries)
    tau = SymMat.diag(1.0, -1.0)
    assert symcalc.iso_inverse_apply(C, tau).entries == pytest.approx((tau * (1.0 / 3.0)).entries)


def test_iso_inverse_rejects_degenerate_moduli():
    with pytest.raises(NonInvertibleError):
        symcalc.iso_inverse_apply(IsoTensor.effective(1.0, 0.0), SymMat.identity(2))


def test_iso_quad_coercive_on_subspaces(rng):
    C = IsoTensor(0.6, 1.1)
    _, dev = symcalc.dev_split(symcalc.random_symmat(3, rng))
    assert symcalc.iso_quad(C, dev) >= 2.0 * C.mu * dev.ddot(dev) * (1.0 - 1e-12)
    sph = SymMat.identity(3) * 0.8
    assert symcalc.iso_quad(C, sph) == pytest.approx((3 * C.lam + 2 * C.mu) * sph.ddot(sph))


def test_rank_one_factor_round_trip(rng):
    for dim in (2, 3):
        a, b = rng.standard_normal(dim), rng.standard_normal(dim)
        xi = symcalc.sym_outer(a, b)
        u, v = symcalc.rank_one_factor(xi)
        assert symcalc.sym_outer(u, v).entries == pytest.approx(xi.entries, abs=1e-12)


def test_rank_one_factor_rejects_definite_matrices():
    with pytest.raises(ValueError):
        symcalc.rank_one_factor(SymMat.identity(2))


def test_fibonacci_sphere_returns_unit_vectors():
    points = symcalc.fibonacci_sphere(256)
    assert points.shape == (256, 3)
    assert np.linalg.norm(points, axis=1) == pytest.approx(np.ones(256))


def test_frobenius_product_doubles_off_diagonal():
    xi = SymMat(2, (1.0, 2.0, 3.0))
    assert xi.ddot(xi) == pytest.approx(1.0 + 4.0 + 2.0 * 9.0)
    assert xi.norm() == pytest.approx(math.sqrt(23.0))
