"""Twisting by characters and finite-dimensional representations."""

import math

import numpy as np
import pytest

from l2twist.grouprings import Character, GroupDescriptor, GroupRingElement, GroupRingMatrix
from l2twist.mahler import det_matrix_over_Zd
from l2twist.twisting import (
    BasedRepresentation,
    action_norm_bound,
    log_abs_det_action,
    nu,
    theta,
    twist_rep,
    twist_scalar,
)

Z = GroupDescriptor.abelian(1)
Z2 = GroupDescriptor.abelian(2)
PHI = Character(target="R", values=(1.0,))


def mono(group, key, c=1):
    return GroupRingElement.monomial(group, tuple(key), c)


def test_twist_scalar_scales_by_t_to_phi():
    A = GroupRingMatrix(Z, [[mono(Z, (1,))]])
    B = twist_scalar(A, PHI, 2.0)
    assert B.entries[0][0].coefficient((1,)) == pytest.approx(2.0)


def test_twist_scalar_at_one_is_identity():
    A = GroupRingMatrix(Z, [[mono(Z, (3,), 5) + mono(Z, (-1,), 2)]])
    B = twist_scalar(A, PHI, 1.0)
    assert B.entries[0][0].coefficient((3,)) == 5
    assert B.entries[0][0].coefficient((-1,)) == 2


def test_twist_scalar_negative_exponent():
    A = GroupRingMatrix(Z, [[mono(Z, (-2,), 3)]])
    B = twist_scalar(A, PHI, 0.5)
    # t^{phi(-2)} = 0.5^{-2} = 4
    assert B.entries[0][0].coefficient((-2,)) == pytest.approx(12.0)


def test_twist_scalar_composes_multiplicatively():
    A = GroupRingMatrix(Z, [[mono(Z, (1,)) + mono(Z, (0,), -1)]])
    B = twist_scalar(twist_scalar(A, PHI, 2.0), PHI, 3.0)
    C = twist_scalar(A, PHI, 6.0)
    assert B.entries[0][0].coefficient((1,)) == pytest.approx(
        C.entries[0][0].coefficient((1,))
    )


def test_twist_rep_matches_scalar_for_one_dim():
    A = GroupRingMatrix(Z, [[mono(Z, (2,), 3) + mono(Z, (0,), -1)]])
    V = BasedRepresentation.scalar_t(2.0)
    B = twist_rep(A, Character.identity(1), V)
    C = twist_scalar(A, PHI, 2.0)
    assert B.entries[0][0].coefficient((2,)) == pytest.approx(
        C.entries[0][0].coefficient((2,))
    )


def test_twist_rep_trivial_rep_inflates_identity_blocks():
    A = GroupRingMatrix.identity(Z, 2)
    V = BasedRepresentation.trivial(1, dim=3)
    B = twist_rep(A, Character.identity(1), V)
    assert B.shape == (6, 6)
    for i in range(6):
        assert B.entries[i][i].coefficient((0,)) == 1


def test_twist_rep_diagonal_blocks():
    A = GroupRingMatrix(Z, [[mono(Z, (1,))]])
    V = BasedRepresentation.diagonal([[2.0, 3.0]])
    B = twist_rep(A, Character.identity(1), V)
    assert B.shape == (2, 2)
    assert B.entries[0][0].coefficient((1,)) == pytest.approx(2.0)
    assert B.entries[1][1].coefficient((1,)) == pytest.approx(3.0)
    assert B.entries[0][1].is_zero


def test_theta_examples():
    V = BasedRepresentation.diagonal([[2.0, 3.0]])
    assert theta(V, [(1,)]) == pytest.approx(6.0)
    assert theta(V, [(0,)]) == pytest.approx(1.0)
    assert theta(V, [(1,), (0,), (-1,)]) == pytest.approx(1.0 / 6.0)
    assert theta(V, []) == math.inf


def test_theta_monotone_under_union():
    V = BasedRepresentation.diagonal([[0.5, 4.0]])
    assert theta(V, [(1,), (2,)]) <= theta(V, [(1,)]) + 1e-15


def test_nu_trivial_rep_is_one():
    V = BasedRepresentation.trivial(1, dim=2)
    assert nu(V, [(1,), (-1,)]) == pytest.approx(1.0)


def test_nu_scalar_oracle():
    # one-dimensional V with action value t, support {(1)}: M = 1,
    # nu = ||Action(2)||^{-1} * t^{-2} = t^{-4} for t >= 1
    for t in (2.0, 3.0, 1.5):
        V = BasedRepresentation.scalar_t(t)
        assert nu(V, [(1,)]) == pytest.approx(t ** -4.0)
    # shrinking action mirrors through eps = -1
    V = BasedRepresentation.scalar_t(0.5)
    assert nu(V, [(1,)]) == pytest.approx(0.5 ** 4.0)


def test_nu_rejects_empty_support():
    V = BasedRepresentation.scalar_t(2.0)
    with pytest.raises(ValueError):
        nu(V, [])


def test_nu_never_exceeds_theta():
    rng = np.random.default_rng(3)
    for _ in range(50):
        d = int(rng.integers(1, 3))
        m = int(rng.integers(1, 4))
        V = BasedRepresentation.diagonal(
            [list(rng.uniform(0.25, 4.0, size=m)) for _ in range(d)]
        )
        S = [tuple(int(v) for v in rng.integers(-3, 4, size=d)) for _ in range(3)]
        assert nu(V, S) <= theta(V, S) * (1 + 1e-12)


def test_nu_lower_bounds_twisted_determinant():
    # integer 1x1 matrices with 1-dim V: exact twisted value is a Mahler measure
    rng = np.random.default_rng(4)
    phi = Character.identity(1)
    for _ in range(30):
        e = GroupRingElement.zero(Z)
        for _ in range(3):
            c = int(rng.integers(-3, 4))
            if c:
                e = e + mono(Z, (int(rng.integers(-2, 3)),), c)
        if e.is_zero:
            continue
        A = GroupRingMatrix(Z, [[e]])
        V = BasedRepresentation.scalar_t(float(rng.uniform(0.25, 4.0)))
        exact = det_matrix_over_Zd(twist_rep(A, phi, V)).logdet.value
        if exact == -math.inf:
            continue
        S = {phi.evaluate(Z, k) for k in A.support()}
        assert exact >= math.log(nu(V, S)) - 1e-9


def test_log_abs_det_action_additive():
    V = BasedRepresentation.diagonal([[2.0, 0.5], [3.0, 1.0]])
    a = log_abs_det_action(V, (1, 0))
    b = log_abs_det_action(V, (0, 1))
    both = log_abs_det_action(V, (1, 1))
    assert both == pytest.approx(a + b)
    assert log_abs_det_action(V, (0, 0)) == pytest.approx(0.0)


def test_action_norm_bound():
    V = BasedRepresentation.diagonal([[2.0, 0.5]])
    assert action_norm_bound(V, [(1,)]) == pytest.approx(2.0)
    assert action_norm_bound(V, [(-1,)]) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        action_norm_bound(V, [])


def test_unitary_one_dim_twist_preserves_determinants():
    phi = Character.identity(1)
    A = GroupRingMatrix(
        Z, [[mono(Z, (1,), 2) + mono(Z, (0,), -1), mono(Z, (0,), 1)],
            [GroupRingElement.zero(Z), mono(Z, (1,)) + mono(Z, (0,), -3)]]
    )
    base = det_matrix_over_Zd(A).logdet.value
    rng = np.random.default_rng(5)
    for _ in range(10):
        u = np.exp(2j * np.pi * rng.random())
        V = BasedRepresentation(1, (np.array([[u]]),))
        twisted = det_matrix_over_Zd(twist_rep(A, phi, V)).logdet.value
        assert twisted == pytest.approx(base, abs=1e-9)


def test_direct_sum_determinants_add():
    phi = Character.identity(1)
    A = GroupRingMatrix(Z, [[mono(Z, (1,), 2) + mono(Z, (0,), -1)]])
    V1 = BasedRepresentation.scalar_t(2.0)
    V2 = BasedRepresentation.scalar_t(0.5)
    d1 = det_matrix_over_Zd(twist_rep(A, phi, V1)).logdet.value
    d2 = det_matrix_over_Zd(twist_rep(A, phi, V2)).logdet.value
    both = det_matrix_over_Zd(twist_rep(A, phi, V1.direct_sum(V2))).logdet.value
    assert both == pytest.approx(d1 + d2, abs=1e-9)


def test_rep_constructor_rejects_non_commuting():
    a = np.array([[0.0, 1.0], [1.0, 0.0]])
    b = np.array([[1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        BasedRepresentation(2, (a, b))


def test_rep_constructor_rejects_singular():
    s = np.array([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        BasedRepresentation(2, (s,))
