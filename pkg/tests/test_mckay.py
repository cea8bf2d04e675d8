from fractions import Fraction

import numpy as np
import pytest

from spin7kit.mckay import (GroupError, age, build_group, cartan_matrix, character_table, close_group,
                            conjugacy_age_spectrum, freeness_check, identify_dynkin, mckay_quiver, su2_cyclic,
                            tensor_power_check)

ORDERS = {"su2.cyclic:5": 5, "su2.bindih:3": 12, "su2.bintet": 24, "su2.binoct": 48, "su2.binico": 120}


@pytest.mark.parametrize("desc,order", ORDERS.items())
def test_orders_and_axioms(desc, order):
    g = build_group(desc)
    assert g.order == order and g.verify_axioms()


@pytest.mark.parametrize("desc", ["su2.bindih:3", "su2.bintet", "su2.binico"])
def test_character_table(desc):
    g = build_group(desc)
    t = character_table(g)
    assert t.orthogonality_error() < 1e-9
    assert sum(d * d for d in t.degrees) == g.order
    assert len(t.degrees) == len(g.classes)
    chk = tensor_power_check(g, t)
    assert chk["integral"] and chk["all_irreducibles_seen"]


def test_table_invariant_under_conjugation():
    g = build_group("su2.bintet")
    rng = np.random.default_rng(0)
    Q, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    h = g.conjugate_by(Q)
    assert sorted(character_table(h).degrees) == sorted(character_table(g).degrees)
    assert cartan_matrix(mckay_quiver(h)).dynkin == "E~6"


def test_quiver_is_symmetric_without_loops_in_su2():
    q = mckay_quiver(build_group("su2.binoct"))
    assert q.is_symmetric() and not q.loops()


def test_su3_cyclic_quiver_is_directed():
    q = mckay_quiver(build_group("su3.cyclic:3:1,1,1"))
    assert not q.is_symmetric()
    assert q.n_vertices == 3
    assert not q.loops()
    # each vertex has three outgoing arrows
    assert np.all(q.adjacency.sum(axis=1) == 3)


def test_cartan_kernel_is_dimension_vector():
    g = build_group("su2.bindih:4")
    t = character_table(g)
    c = cartan_matrix(mckay_quiver(g, t))
    assert c.dynkin == "D~6" and c.finite_dynkin == "D6"
    assert not np.any(c.matrix @ np.array(t.degrees))
    assert all(m > 0 for m in c.psd_certificate)


def test_identify_rejects_non_ade():
    A = np.ones((3, 3), dtype=int) - np.eye(3, dtype=int)
    A[0, 1] = A[1, 0] = 3
    assert identify_dynkin(A) == "non-ADE"


def test_ages():
    w = np.exp(2j * np.pi / 3)
    assert age(np.diag([w, w, w]), 3) == 1
    assert age(np.diag([w, w * w, 1])) == 1
    assert age(np.diag([w * w, w * w, w * w]), 3) == 2
    spec = conjugacy_age_spectrum(build_group("su3.cyclic:3:1,1,1"))
    assert sorted(a.age for a in spec) == [0, 1, 2]
    assert all(isinstance(a.age, Fraction) for a in spec)


def test_freeness():
    assert freeness_check(build_group("su2.binico")).free
    assert not freeness_check(build_group("su3.cyclic:2:1,1,0")).free
    for n in (1, 3):
        g = build_group(f"spin7.gamma_n:{n}")
        assert g.order == 8 * n and freeness_check(g).free


@pytest.mark.parametrize("bad", ["su2.cyclic", "su2.cyclic:x", "nonsense", "su3.cyclic:3:1,1,2", "su2.bindih:1"])
def test_bad_descriptors(bad):
    with pytest.raises(GroupError):
        build_group(bad)


def test_closure_bound():
    with pytest.raises(GroupError):
        close_group([np.diag([np.exp(2j), np.exp(-2j)])], max_order=50)
    assert su2_cyclic(1).order == 1
