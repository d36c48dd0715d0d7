"""End-to-end acceptance checks on exactly solvable families and random
property instances, each with a wall-clock budget."""

import math
import time

import numpy as np
import pytest

from l2twist.grouprings import Character, GroupDescriptor, GroupRingElement, GroupRingMatrix
from l2twist.mahler import (
    LaurentPoly,
    lead,
    mahler,
    mahler_exact_univariate,
    mahler_lawton,
    mahler_quadrature,
    det_matrix_over_Zd,
    rank_fraction_field,
)
from l2twist.quotients import (
    QuotientTower,
    approx_sequence,
    bound_certificate,
    regular_det_finite,
    semicontinuity_check,
    vn_dim_ker,
)
from l2twist.torsion import (
    bound_envelope,
    circle_complex,
    degree,
    extension_complex,
    mapping_torus_complex,
    torsion_at,
    torsion_curve,
    torus_complex,
    verify_base_change,
    verify_duality,
    verify_product,
    verify_restriction,
    verify_scaling,
    verify_sum,
    BasisChange,
)
from l2twist.twisting import BasedRepresentation, twist_rep

Z = GroupDescriptor.abelian(1)
Z2 = GroupDescriptor.abelian(2)
PHI = Character(target="R", values=(1.0,))


def mono(group, key, c=1):
    return GroupRingElement.monomial(group, tuple(key), c)


def random_ring_matrix(rng, group, rows, cols, max_terms=3, span=2, coeff=3):
    d = group.rank
    grid = []
    for _ in range(rows):
        row = []
        for _ in range(cols):
            e = GroupRingElement.zero(group)
            for _ in range(int(rng.integers(1, max_terms + 1))):
                key = tuple(int(v) for v in rng.integers(-span, span + 1, size=d))
                c = int(rng.integers(-coeff, coeff + 1))
                if c:
                    e = e + mono(group, key, c)
            row.append(e)
        grid.append(row)
    return GroupRingMatrix(group, grid)


def test_acceptance_circle_curve():
    start = time.monotonic()
    C = circle_complex()
    ts = [2.0 ** k / 4.0 for k in range(9)]
    for t in ts:
        assert torsion_at(C, PHI, t) == pytest.approx(math.log(max(t, 1.0)), abs=1e-9)
    curve = torsion_curve(C, PHI, ts[0], ts[-1], len(ts))
    res = degree(curve)
    assert res.deg == pytest.approx(1.0, abs=1e-6)
    assert time.monotonic() - start < 1.0


def test_acceptance_torus_vanishing():
    start = time.monotonic()
    C = torus_complex(2)
    phi = Character(target="R", values=(1.0, 1.0))
    curve = torsion_curve(C, phi, 0.25, 4.0, 7)
    assert curve.ok()
    for v in curve.values:
        assert abs(v) <= 1e-9
    assert time.monotonic() - start < 1.0


def test_acceptance_mapping_torus_plateaus():
    start = time.monotonic()
    mt = mapping_torus_complex([np.zeros((2, 1))], [np.eye(1), np.eye(2)])
    assert mt.T0 == pytest.approx(1.0)
    assert mt.T_inf == pytest.approx(1.0)
    for t in (0.25, 0.5, 1.0, 2.0, 4.0):
        want = 0.0 if t <= 1.0 else -math.log(t)
        assert torsion_at(mt.complex, PHI, t) == pytest.approx(want, abs=1e-9)
    assert time.monotonic() - start < 1.0


def test_acceptance_quotient_convergence():
    start = time.monotonic()
    A = GroupRingMatrix(Z, [[mono(Z, (1,), 2) + mono(Z, (0,), -1)]])
    tower = QuotientTower.cyclic(1, [2 ** k for k in range(4, 13)])
    res = approx_sequence(A, tower)
    target = math.log(2.0)
    for level in res.levels:
        assert level.reg_logdet <= target + 1e-6
        assert level.vn_dim_ker == pytest.approx(0.0, abs=1e-9)
    assert res.levels[-1].reg_logdet == pytest.approx(target, abs=1e-3)

    B = GroupRingMatrix(Z, [[mono(Z, (1,)) + mono(Z, (0,), -1)]])
    N = 4096
    res2 = approx_sequence(B, QuotientTower.cyclic(1, [N]))
    assert res2.levels[0].vn_dim_ker == pytest.approx(1.0 / N, abs=1e-3)
    assert res2.levels[0].reg_logdet == pytest.approx(math.log(N) / N, abs=1e-3)
    assert time.monotonic() - start < 10.0


def test_acceptance_bound_certificates():
    start = time.monotonic()
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(200):
        d = int(rng.integers(1, 3))
        G = GroupDescriptor.abelian(d)
        r = int(rng.integers(1, 3))
        A = random_ring_matrix(rng, G, r, r)
        m = int(rng.integers(1, 4))
        V = BasedRepresentation.diagonal(
            [list(rng.uniform(0.25, 4.0, size=m)) for _ in range(d)]
        )
        phi = Character.identity(d)
        k = A.rows - rank_fraction_field(A)
        cert = bound_certificate(A, phi, V, kernel_dim=k, has_section=True)
        exact = det_matrix_over_Zd(twist_rep(A, phi, V)).logdet.value
        if exact == -math.inf:
            continue
        checked += 1
        assert cert.lower - 1e-8 <= exact <= cert.upper + 1e-8
        assert cert.theta_lower >= cert.lower - 1e-12
    assert checked >= 150
    assert time.monotonic() - start < 60.0


def test_acceptance_twisted_betti_rank():
    start = time.monotonic()
    rng = np.random.default_rng(8)
    phi = Character.identity(2)
    for _ in range(100):
        rows, cols = (int(v) for v in rng.integers(1, 4, size=2))
        A = random_ring_matrix(rng, Z2, rows, cols, max_terms=2, span=1, coeff=2)
        m = int(rng.integers(1, 4))
        V = BasedRepresentation.diagonal(
            [list(rng.uniform(0.25, 4.0, size=m)) for _ in range(2)]
        )
        assert rank_fraction_field(twist_rep(A, phi, V)) == m * rank_fraction_field(A)
    assert time.monotonic() - start < 30.0


def test_acceptance_mahler_oracles():
    start = time.monotonic()
    rng = np.random.default_rng(9)

    # exact Jensen sums against torus quadrature, away from the unit circle
    accepted = 0
    while accepted < 50:
        deg = int(rng.integers(1, 9))
        coeffs = rng.integers(-5, 6, size=deg + 1)
        if coeffs[-1] == 0 or not np.any(coeffs[:-1]):
            continue
        roots = np.roots(coeffs[::-1])
        if np.any(np.abs(np.abs(roots) - 1.0) < 1e-3):
            continue
        p = LaurentPoly(1, {(i,): complex(c) for i, c in enumerate(coeffs) if c})
        a = mahler_exact_univariate(p).value
        b = mahler_quadrature(p, N=4096).value
        assert a == pytest.approx(b, abs=1e-3)
        accepted += 1

    smyth = mahler_lawton(LaurentPoly(2, {(0, 0): 1, (1, 0): 1, (0, 1): 1}))
    quad = mahler_quadrature(LaurentPoly(2, {(0, 0): 1, (1, 0): 1, (0, 1): 1}), N=512)
    assert smyth.value == pytest.approx(quad.value, abs=2e-3)

    violations = 0
    for _ in range(200):
        d = int(rng.integers(1, 3))
        terms = {}
        for _ in range(int(rng.integers(1, 5))):
            key = tuple(int(v) for v in rng.integers(-2, 3, size=d))
            c = int(rng.integers(-4, 5))
            if c:
                terms[key] = terms.get(key, 0) + c
        terms = {k: complex(v) for k, v in terms.items() if v}
        if not terms:
            continue
        p = LaurentPoly(d, terms)
        if mahler(p).value < math.log(abs(lead(p))) - 1e-6:
            violations += 1
    assert violations == 0
    assert time.monotonic() - start < 120.0


def test_acceptance_envelope():
    start = time.monotonic()
    C = circle_complex()
    env = bound_envelope(C, PHI)
    assert env.C == pytest.approx(4.0)
    assert env.D == pytest.approx(math.log(2.0))
    curve = torsion_curve(C, PHI, 0.25, 4.0, 9)
    for t, v in zip(curve.ts, curve.values):
        assert abs(v) <= 4.0 * abs(math.log(t)) + math.log(2.0) + 1e-9
        assert env.contains(t, v)
    assert time.monotonic() - start < 1.0


def test_acceptance_property_verifiers():
    start = time.monotonic()
    C = circle_complex()
    for r in (0.5, 2.0, 3.0):
        rep = verify_scaling(C, PHI, r)
        assert rep.ok and rep.max_residual <= 1e-9

    rep = verify_duality(C, C, 1, PHI)
    assert rep.ok and rep.max_residual <= 1e-9
    assert rep.detail["slope"] == pytest.approx(1.0, abs=1e-9)

    rep = verify_restriction(C, PHI, [2])
    assert rep.ok and rep.detail["index"] == 2 and rep.max_residual <= 1e-9

    change = BasisChange({1: ((0,), (1,), ((1,),))})
    rep = verify_base_change(C, PHI, change)
    assert rep.ok and rep.max_residual <= 1e-9
    assert rep.detail["shift"] == pytest.approx(-1.0, abs=1e-9)

    total = extension_complex(C, circle_complex(),
                              {1: GroupRingMatrix(Z, [[mono(Z, (2,), 5)]])})
    rep = verify_sum(C, circle_complex(), total, PHI)
    assert rep.ok and rep.max_residual <= 1e-9

    rep = verify_product(C, (1, 1), [np.array([[2.0]])], PHI)
    assert rep.ok and rep.max_residual <= 1e-9
    assert time.monotonic() - start < 5.0


def test_acceptance_semicontinuity():
    start = time.monotonic()
    rng = np.random.default_rng(10)
    for trial in range(20):
        n = int(rng.integers(1, 4))
        M = rng.normal(size=(n, n))
        E = rng.normal(size=(n, n))
        family = [M + 2.0 ** -j * E for j in range(4, 24)]
        report = semicontinuity_check(family, M, det_atol=1e-4)
        assert report.dims_ok, trial
        assert report.det_ok, trial
        # the raw inequalities behind the report
        limit_dim = vn_dim_ker(M, 1)
        limit_det = regular_det_finite(M)
        assert max(report.tail_dims) <= limit_dim + 1e-9
        assert max(report.tail_dets) <= limit_det * (1 + 1e-6) + 1e-4
    assert time.monotonic() - start < 10.0


def test_acceptance_unitary_invariance():
    start = time.monotonic()
    phi = Character.identity(1)
    A = GroupRingMatrix(
        Z,
        [[mono(Z, (1,), 2) + mono(Z, (0,), -1), mono(Z, (0,))],
         [GroupRingElement.zero(Z), mono(Z, (1,)) + mono(Z, (0,), -3)]],
    )
    base = det_matrix_over_Zd(A).logdet.value
    rng = np.random.default_rng(11)
    for _ in range(20):
        u = np.exp(2j * np.pi * rng.random())
        V = BasedRepresentation(1, (np.array([[u]]),))
        twisted = det_matrix_over_Zd(twist_rep(A, phi, V)).logdet.value
        assert twisted == pytest.approx(base, abs=1e-9)
    assert time.monotonic() - start < 5.0
