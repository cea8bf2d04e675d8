import numpy as np
import pytest

from spin7kit.exterior import basis, wedge_coeffs
from spin7kit.octonion import cayley0
from spin7kit.spin7.torsion import CallableField, ConstantField, finite_diff_torsion, raw_torsion

PHI = cayley0().coeffs


def test_constant_field_is_closed():
    t = finite_diff_torsion(ConstantField(PHI), np.zeros(8))
    assert np.linalg.norm(t.d) == 0 and t.step_ok


def test_linear_field_matches_wedge():
    rng = np.random.default_rng(0)
    eta = rng.normal(size=70)
    a = rng.normal(size=8)
    t = finite_diff_torsion(CallableField(lambda p: PHI + (a @ p) * eta, 4), rng.normal(size=8))
    assert np.allclose(t.d, wedge_coeffs(a, 1, eta, 4), atol=1e-9)
    assert np.allclose(t.d, t.d10 + t.d01 + t.d21)


def test_fibre_and_base_split_with_flat_connection():
    # dependence on a fibre coordinate only shows up in d01
    eta = np.zeros(70)
    eta[0] = 1.0
    t = finite_diff_torsion(CallableField(lambda p: PHI + p[5] * eta, 4), np.zeros(8))
    assert np.linalg.norm(t.d10) < 1e-12 and np.linalg.norm(t.d21) < 1e-12
    assert np.linalg.norm(t.d01) > 0.5


def test_curvature_term_for_twisted_connection():
    # Γ^b_a = x_c-dependent: nonzero curvature gives a d21 contribution
    def f(p):
        g = np.zeros((4, 4))
        g[0, 1] = p[0]
        return PHI, g
    t = finite_diff_torsion(CallableField(f, 4), np.zeros(8))
    assert np.linalg.norm(t.d21) > 0.1
    by = t.by_type("d21")
    assert set(by) <= {(h, 5 - h) for h in range(6)}
    assert np.isclose(np.sqrt(sum(v * v for v in by.values())), np.linalg.norm(t.d21))


def test_richardson_improves_on_raw_stencil():
    f = CallableField(lambda p: PHI * (1 + np.sin(p[0])), 4)
    exact = wedge_coeffs(np.eye(8)[0], 1, PHI, 4) * np.cos(0.3)
    p = np.array([0.3, 0, 0, 0, 0, 0, 0, 0])
    raw = raw_torsion(f, p, 1e-2)[0]
    ext = finite_diff_torsion(f, p, 1e-2).d
    assert np.linalg.norm(ext - exact) < 1e-3 * np.linalg.norm(raw - exact)


def test_bad_point_shape():
    with pytest.raises(ValueError):
        finite_diff_torsion(ConstantField(PHI), np.zeros(7))
    assert len(basis(5)) == 56


def test_raw_stencil_is_second_order():
    f = CallableField(lambda p: PHI * np.exp(p[1]) + np.roll(PHI, 3) * np.sin(p[6]), 4)
    p = np.array([0, 0.2, 0, 0, 0, 0, -0.4, 0])
    exact = finite_diff_torsion(f, p, 1e-3).d
    e1 = np.linalg.norm(raw_torsion(f, p, 0.04)[0] - exact)
    e2 = np.linalg.norm(raw_torsion(f, p, 0.02)[0] - exact)
    assert abs(e1 / e2 - 4) <= 0.5
