"""Finite-quotient approximation, certificates and the semicontinuity harness."""

import math

import numpy as np
import pytest

from l2twist.grouprings import Character, GroupDescriptor, GroupRingElement, GroupRingMatrix
from l2twist.mahler import det_matrix_over_Zd, rank_fraction_field
from l2twist.quotients import (
    FiniteQuotient,
    QuotientTower,
    approx_sequence,
    bound_certificate,
    reg_logdet,
    regular_det_finite,
    regular_rep_matrix,
    semicontinuity_check,
    vn_dim_ker,
)
from l2twist.twisting import BasedRepresentation, twist_rep

Z = GroupDescriptor.abelian(1)


def mono(group, key, c=1):
    return GroupRingElement.monomial(group, tuple(key), c)


def z_minus_one():
    return mono(Z, (1,)) + mono(Z, (0,), -1)


def two_z_minus_one():
    return mono(Z, (1,), 2) + mono(Z, (0,), -1)


def test_regular_rep_identity():
    Q = FiniteQuotient.cyclic_product([5])
    A = GroupRingMatrix.identity(Z, 2)
    M = regular_rep_matrix(A, Q)
    assert np.allclose(M, np.eye(10))


def test_regular_rep_circulant_eigenvalues():
    Q = FiniteQuotient.cyclic_product([3])
    A = GroupRingMatrix(Z, [[z_minus_one()]])
    M = regular_rep_matrix(A, Q)
    eig = np.sort(np.abs(np.linalg.eigvals(M)))
    expected = np.sort([abs(np.exp(2j * np.pi * k / 3) - 1) for k in range(3)])
    assert np.allclose(eig, expected, atol=1e-12)


def test_vn_dim_ker_closed_forms():
    A = GroupRingMatrix(Z, [[z_minus_one()]])
    for N in (4, 16, 64):
        Q = FiniteQuotient.cyclic_product([N])
        M = regular_rep_matrix(A, Q)
        assert vn_dim_ker(M, N) == pytest.approx(1.0 / N, abs=1e-12)
    B = GroupRingMatrix(Z, [[two_z_minus_one()]])
    Q = FiniteQuotient.cyclic_product([16])
    assert vn_dim_ker(regular_rep_matrix(B, Q), 16) == pytest.approx(0.0, abs=1e-12)
    assert vn_dim_ker(np.zeros((6, 6)), 3) == pytest.approx(2.0)


def test_reg_logdet_closed_forms():
    A = GroupRingMatrix(Z, [[z_minus_one()]])
    for N in (8, 64, 256):
        Q = FiniteQuotient.cyclic_product([N])
        M = regular_rep_matrix(A, Q)
        assert reg_logdet(M, N) == pytest.approx(math.log(N) / N, abs=1e-10)
    B = GroupRingMatrix(Z, [[two_z_minus_one()]])
    for N in (8, 32):
        Q = FiniteQuotient.cyclic_product([N])
        M = regular_rep_matrix(B, Q)
        assert reg_logdet(M, N) == pytest.approx(math.log(2.0 ** N - 1.0) / N, abs=1e-10)
    assert reg_logdet(np.zeros((4, 4)), 2) == pytest.approx(0.0)


def test_abelian_fast_path_matches_generic():
    Qfast = FiniteQuotient.cyclic_product([3, 4])
    Qslow = FiniteQuotient(12, Qfast.generators)
    assert Qfast.abelian == (3, 4) and Qslow.abelian is None
    Z2 = GroupDescriptor.abelian(2)
    A = GroupRingMatrix(
        Z2,
        [[mono(Z2, (1, 0), 2) + mono(Z2, (0, 1), -1) + mono(Z2, (0, 0), 1)]],
    )
    tower = QuotientTower([Qfast])
    tower2 = QuotientTower([Qslow])
    fast = approx_sequence(A, tower).levels[0]
    slow = approx_sequence(A, tower2).levels[0]
    assert fast.vn_dim_ker == pytest.approx(slow.vn_dim_ker, abs=1e-9)
    assert fast.reg_logdet == pytest.approx(slow.reg_logdet, abs=1e-9)


def test_quotient_rejects_non_bijective_generator():
    with pytest.raises(ValueError):
        FiniteQuotient(3, [[0, 0, 1]])


def test_approx_sequence_two_z_minus_one_tower():
    A = GroupRingMatrix(Z, [[two_z_minus_one()]])
    tower = QuotientTower.cyclic(1, [2 ** k for k in range(4, 11)])
    res = approx_sequence(A, tower)
    target = math.log(2.0)
    for level in res.levels:
        assert level.reg_logdet <= target + 1e-6
        assert level.vn_dim_ker == pytest.approx(0.0, abs=1e-9)
    assert res.levels[-1].reg_logdet == pytest.approx(target, abs=1e-3)
    assert res.dims_stable
    assert res.dims_limit_estimate == pytest.approx(0.0, abs=1e-9)


def test_approx_sequence_zero_matrix():
    A = GroupRingMatrix.zero(Z, 1, 1)
    tower = QuotientTower.cyclic(1, [4, 8, 16])
    res = approx_sequence(A, tower)
    for level in res.levels:
        assert level.vn_dim_ker == pytest.approx(1.0)
        assert level.reg_logdet == pytest.approx(0.0)


def test_approx_with_scalar_twist():
    A = GroupRingMatrix(Z, [[z_minus_one()]])
    phi = Character(target="R", values=(1.0,))
    tower = QuotientTower.cyclic(1, [64, 128, 256])
    res = approx_sequence(A, tower, twist=(phi, 2.0))
    # twisted symbol is 2z - 1: determinant ln 2, kernel trivial
    assert res.levels[-1].reg_logdet == pytest.approx(math.log(2.0), abs=1e-2)
    assert res.levels[-1].vn_dim_ker == pytest.approx(0.0, abs=1e-9)


def test_bound_certificate_contains_exact_value():
    phi = Character.identity(1)
    A = GroupRingMatrix(Z, [[two_z_minus_one()]])
    V = BasedRepresentation.diagonal([[2.0, 0.5]])
    k = A.rows - rank_fraction_field(A)
    cert = bound_certificate(A, phi, V, kernel_dim=k, has_section=True)
    exact = det_matrix_over_Zd(twist_rep(A, phi, V)).logdet.value
    assert cert.lower - 1e-9 <= exact <= cert.upper + 1e-9
    assert cert.theta_lower is not None
    assert cert.theta_lower >= cert.lower - 1e-12


def test_bound_certificate_trivial_rep_contains_zero():
    phi = Character.identity(1)
    A = GroupRingMatrix(Z, [[z_minus_one()]])
    V = BasedRepresentation.trivial(1, dim=2)
    k = A.rows - rank_fraction_field(A)
    cert = bound_certificate(A, phi, V, kernel_dim=k)
    assert cert.lower - 1e-12 <= 0.0 <= cert.upper + 1e-12
    assert cert.theta_lower is None


def test_bound_certificate_scalar_grid():
    phi = Character.identity(1)
    A = GroupRingMatrix(Z, [[z_minus_one()]])
    k = A.rows - rank_fraction_field(A)
    for t in (0.125, 0.25, 1.0, 4.0, 8.0):
        V = BasedRepresentation.scalar_t(t)
        cert = bound_certificate(A, phi, V, kernel_dim=k, has_section=True)
        exact = math.log(max(t, 1.0))  # Mahler measure of tz - 1
        assert cert.lower - 1e-9 <= exact <= cert.upper + 1e-9
        assert cert.theta_lower <= exact + 1e-9


def test_regular_det_finite_cases():
    assert regular_det_finite(np.eye(3)) == pytest.approx(1.0)
    assert regular_det_finite(np.diag([2.0, 3.0])) == pytest.approx(6.0)
    assert regular_det_finite(np.zeros((2, 2))) == pytest.approx(0.0)
    # a singular square matrix is not injective, so the value collapses to 0
    assert regular_det_finite(np.array([[1.0, 1.0], [1.0, 1.0]])) == pytest.approx(0.0)


def test_semicontinuity_constant_family():
    M = np.diag([2.0, 0.5])
    report = semicontinuity_check([M] * 8, M)
    assert report.ok


def test_semicontinuity_shrinking_perturbation():
    rng = np.random.default_rng(7)
    M = rng.normal(size=(3, 3))
    family = [M + (1.0 / (j + 1)) * np.eye(3) for j in range(1, 200)]
    report = semicontinuity_check(family, M, det_atol=0.05)
    assert report.dims_ok
    assert report.det_ok


def test_semicontinuity_dimension_jump_in_limit():
    # family of invertible matrices converging to 0: kernel dimension jumps up,
    # which is exactly what upper semicontinuity permits
    family = [2.0 ** -j * np.eye(2) for j in range(5, 25)]
    report = semicontinuity_check(family, np.zeros((2, 2)))
    assert report.ok
