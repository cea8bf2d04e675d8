import numpy as np
import pytest

from spin7kit.chambers import StabilityParam
from spin7kit.hk.family import KronheimerFamily, harmonic_slope_space
from spin7kit.hk.quotient import (ChartDimensionError, ConvergenceError, ale_decay_fit, fiber_distance,
                                  kahler_triple, moment_solve, nearest_point, quotient_metric, tangent_chart,
                                  triple_pairing)
from spin7kit.hk.rep import RepSpace, constellation_residual, scaling_transport
from spin7kit.mckay import build_group


@pytest.fixture(scope="module")
def z2():
    return RepSpace(build_group("su2.cyclic:2"))


@pytest.fixture(scope="module")
def z3():
    return RepSpace(build_group("su2.cyclic:3"))


def _zeta(S, vals):
    z = StabilityParam(np.asarray(vals, float), tuple(S.table.degrees))
    return z * (1.0 / S.zeta_norm(z))


@pytest.mark.parametrize("desc", ["su2.cyclic:2", "su2.cyclic:3", "su2.bindih:2", "trivial"])
def test_dimensions(desc):
    g = build_group(desc)
    S = RepSpace(g)
    assert S.real_dim == 4 * g.order
    assert S.gauge_dim == sum(d * d for d in S.table.degrees) - 1


def test_rejects_real_or_non_su2():
    with pytest.raises(ValueError):
        RepSpace(build_group("spin7.gamma_n:1"))


def test_quaternion_relations(z3):
    I, J, K = z3.complex_structures
    E = np.eye(z3.real_dim)
    for M in (I, J, K):
        assert np.allclose(M @ M, -E) and np.allclose(M.T @ M, E)
    assert np.allclose(I @ J, K)
    for W in z3.kahler_forms:
        assert np.allclose(W, -W.T)


def test_moment_jacobian_is_hamiltonian(z3):
    rng = np.random.default_rng(0)
    x, v = rng.normal(size=(2, z3.real_dim))
    X = z3.gauge_vectors(x)
    Jm = z3.mu_jacobian(x).reshape(3, z3.gauge_dim, -1)
    for k, W in enumerate(z3.kahler_forms):
        assert np.allclose(Jm[k] @ v, -(X.T @ W) @ v, atol=1e-12)


def test_flat_orbit_is_on_zero_level(z3):
    A = z3.flat_orbit_point(np.array([0.3, 1.0 - 0.2j]))
    assert np.max(np.abs(z3.mu(A.x))) < 1e-12
    assert constellation_residual(A) < 1e-12
    assert z3.equivariance_residual(A) < 1e-12
    B = scaling_transport(A, 2.0)
    assert np.isclose(B.norm(), 2 * A.norm())


def test_solve_chart_metric(z2):
    z = _zeta(z2, [[1, -1], [0.3, -0.3], [-0.2, 0.2]])
    res = moment_solve(z2, z, z2.flat_orbit_point(np.array([0.6, 0.8j]), 1.0))
    assert res.converged and res.residual < 1e-10
    chart = tangent_chart(z2, res.point, strict=True)
    assert chart.dim == chart.expected_dim == 4
    g = quotient_metric(chart)
    assert np.all(np.linalg.eigvalsh(g) > 0)
    P = triple_pairing(kahler_triple(chart))
    # hyperkähler triple: pairing proportional to the identity
    assert np.allclose(P, P[0, 0] * np.eye(3), atol=1e-9 * abs(P[0, 0]))


def test_singular_point_chart(z2):
    A = z2.point(x=np.zeros(z2.real_dim))
    with pytest.raises(ChartDimensionError):
        tangent_chart(z2, A, strict=True)
    assert not tangent_chart(z2, A).regular


def test_strict_solver_raises(z3):
    z = _zeta(z3, [[1, -1, 0], [0, 1, -1], [0.5, 0, -0.5]])
    seed = z3.flat_orbit_point(np.array([0.6, 0.8j]), 1.0)
    with pytest.raises(ConvergenceError):
        moment_solve(z3, z, seed, tol=1e-30, max_iter=3, strict=True)
    assert not moment_solve(z3, z, seed, tol=1e-30, max_iter=3).converged
    with pytest.raises(ValueError):
        moment_solve(z3, z, np.zeros(5))


def test_nearest_point_is_on_level(z2):
    z = _zeta(z2, [[1, -1], [0, 0], [0, 0]])
    a0 = z2.flat_orbit_point(np.array([1.0, 0.5j]), 20.0).x
    p, lam, _ = nearest_point(z2, z, a0)
    assert np.max(np.abs(z2.mu(p) - z2.zeta_coords(z))) < 1e-10
    assert np.linalg.norm(p - a0) < 1.0


def test_decay_fit_validation(z2):
    z = _zeta(z2, [[1, -1], [0, 0], [0, 0]])
    with pytest.raises(ValueError):
        ale_decay_fit(z2, z, [10, 20, 40])
    with pytest.raises(ValueError):
        ale_decay_fit(z2, z, [0.1, 1, 10])
    flat = ale_decay_fit(z2, StabilityParam(np.zeros((3, 2)), (1, 1)), [10, 100])
    assert flat.exact and flat.exponent == -np.inf


def test_fiber_distance_symmetric_and_zero(z2):
    z = _zeta(z2, [[1, -1], [0, 0], [0, 0]])
    z1 = z * 1.2
    assert fiber_distance(z2, z, z) < 1e-8
    assert np.isclose(fiber_distance(z2, z, z1), fiber_distance(z2, z1, z), rtol=0.1)


def test_family_is_cayley_and_harmonic_space(z2):
    assert harmonic_slope_space().shape == (8, 12)
    z0 = StabilityParam([[1, -1], [0.3, -0.3], [0.2, -0.2]], (1, 1))
    fam = KronheimerFamily(z2, z0, StabilityParam([[1, -1]], (1, 1)), np.zeros((4, 3)))
    assert fam.is_cayley()
    A = fam.solve(np.zeros(4), np.full(4, 0.05))
    assert np.max(np.abs(z2.mu(A).ravel() - fam.zeta_at(np.zeros(4)))) < 1e-12
