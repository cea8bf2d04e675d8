import numpy as np
import pytest
from scipy.linalg import expm

from spin7kit.exterior import FourForm, pullback_coeffs
from spin7kit.octonion import cayley0
from spin7kit.spin7.linear import (TUBE_RADIUS, Metric8, MixedForm, NotCayleyError, ThetaProjectionError,
                                   cayley_check, clifford_act, hodge_star, isotypic_projectors, metric_from_cayley,
                                   orbit_factor, pi_tau, projector, q_remainder, stabilizer_algebra, theta_project)

PHI = cayley0()


def _moved(seed=3, scale=0.3):
    """A Cayley form in general position: pullback of Φ₀ by a random GL₊ element."""
    rng = np.random.default_rng(seed)
    A = expm(scale * rng.normal(size=(8, 8)))
    return A, FourForm(4, pullback_coeffs(A, PHI.coeffs, 4))


def test_standard_form_is_self_dual_cayley():
    chk = cayley_check(PHI)
    assert chk.is_cayley and chk.component == 1 and chk.stabilizer_dim == 21
    assert hodge_star(PHI).allclose(PHI)


def test_generic_four_form_is_not_cayley():
    rng = np.random.default_rng(0)
    assert not cayley_check(FourForm(4, rng.normal(size=70))).is_cayley


def test_metric_recovered_from_pulled_back_form():
    A, phi = _moved()
    g = metric_from_cayley(phi).matrix
    assert np.allclose(g, A.T @ A, atol=1e-8)
    P = orbit_factor(phi)
    assert np.allclose(pullback_coeffs(P, PHI.coeffs, 4), phi.coeffs, atol=1e-8)


def test_projectors_are_complete_and_orthogonal():
    for k, ranks in ((2, [7, 21]), (4, None)):
        ps = [p for p in isotypic_projectors(PHI, k) if p.label not in ("tau", "nu")]
        total = sum(p.matrix for p in ps)
        assert np.allclose(total, np.eye(len(total)), atol=1e-10)
        if ranks:
            assert sorted(p.rank for p in ps) == ranks


def test_projectors_equivariant_under_gl():
    A, phi = _moved(5)
    rng = np.random.default_rng(1)
    eta = rng.normal(size=70)
    P0 = projector(PHI, 4, "35").matrix
    P1 = projector(phi, 4, "35").matrix
    lhs = P1 @ pullback_coeffs(A, eta, 4)
    rhs = pullback_coeffs(A, P0 @ eta, 4)
    assert np.allclose(lhs, rhs, atol=1e-8)


def test_pi_tau_is_tangent_projection():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(8, 8))
    # L_X Φ lies in the tangent space of the orbit
    h = 1e-6
    tangent = (pullback_coeffs(expm(h * X), PHI.coeffs, 4) - pullback_coeffs(expm(-h * X), PHI.coeffs, 4)) / (2 * h)
    assert np.allclose(pi_tau(PHI, FourForm(4, tangent)).coeffs, tangent, atol=1e-6)


def test_theta_fixes_orbit_and_rejects_outside_tube():
    assert np.allclose(theta_project(PHI, FourForm(4, np.zeros(70))).coeffs, PHI.coeffs)
    eta = np.zeros(70)
    eta[0] = 10 * TUBE_RADIUS
    with pytest.raises(ThetaProjectionError):
        theta_project(PHI, FourForm(4, eta))


def test_theta_output_is_cayley_and_q_is_quadratic():
    rng = np.random.default_rng(4)
    e = rng.normal(size=70)
    e *= 0.2 / np.linalg.norm(e)
    out = theta_project(PHI, FourForm(4, e))
    assert cayley_check(out).is_cayley
    q1 = np.linalg.norm(q_remainder(PHI, FourForm(4, 0.01 * e)).coeffs)
    q2 = np.linalg.norm(q_remainder(PHI, FourForm(4, 0.005 * e)).coeffs)
    assert 3.5 < q1 / q2 < 4.5


def test_theta_is_gl_equivariant():
    A, phi = _moved(6, 0.2)
    rng = np.random.default_rng(7)
    eta = rng.normal(size=70)
    eta *= 0.1 / np.linalg.norm(eta)
    lhs = theta_project(phi, FourForm(4, pullback_coeffs(A, eta, 4)), check_tube=False).coeffs
    rhs = pullback_coeffs(A, theta_project(PHI, FourForm(4, eta)).coeffs, 4)
    assert np.allclose(lhs, rhs, atol=1e-8)


def test_stabilizer_preserves_form():
    for X in stabilizer_algebra(PHI)[:5]:
        assert np.allclose(pullback_coeffs(expm(X), PHI.coeffs, 4), PHI.coeffs, atol=1e-10)


def test_clifford_square_is_minus_norm():
    v = np.array([1.0, 2, 0, 0, -1, 0, 0, 3])
    one = MixedForm.scalar(1.0)
    twice = clifford_act(v, clifford_act(v, one))
    assert twice.allclose(MixedForm.scalar(-float(v @ v)))


def test_metric8_rejects_indefinite():
    with pytest.raises(ValueError):
        Metric8(np.diag([1.0] * 7 + [-1.0]))


def test_metric_from_non_cayley_raises():
    with pytest.raises((NotCayleyError, ValueError)):
        metric_from_cayley(FourForm(4, np.ones(70)))
