import copy
import json
from fractions import Fraction
from importlib import resources

import pytest

from spin7kit.cohomology import (CohomologyDataError, GradedBetti, HypothesisError, OrbifoldSpec, SchemaError,
                                 StratumSpec, ahat_genus, chen_ruan, fibre_total_betti, full_holonomy_resolution_check,
                                 holonomy_class, inertia_strata, isentropic_check, leray_serre_e2, load_spec,
                                 moduli_dimension, resolution_betti, resolution_report, spec_from_dict)

DATA = resources.files("spin7kit.data")


def _kummer_dict():
    return json.loads((DATA / "kummer_t4.json").read_text())


def test_graded_betti_validation():
    b = GradedBetti((1, 0, 6, 0, 1), closed_oriented=True)
    assert b.euler == 8 and b.n == 4
    with pytest.raises(CohomologyDataError):
        GradedBetti((1, 0, 6, 1, 1), closed_oriented=True)
    with pytest.raises(CohomologyDataError):
        GradedBetti((1, -1))
    with pytest.raises(CohomologyDataError):
        GradedBetti((1, 0, 0, 0, 2, 0, 0, 0, 1), split=(1, 0))


def test_kummer():
    spec = load_spec(DATA / "kummer_t4.json")
    assert len(inertia_strata(spec)) == 2
    assert resolution_betti(spec).b == chen_ruan(spec).b == (1, 0, 22, 0, 1)
    assert isentropic_check(spec).isentropic
    assert full_holonomy_resolution_check(spec).holds


def _codim6_spec():
    amb = GradedBetti((1, 0, 0, 0, 2, 0, 0, 0, 1), split=(1, 1), closed_oriented=True)
    s = StratumSpec(6, "su3.cyclic:3:1,1,1", GradedBetti((1, 0, 1), closed_oriented=True), label="S2")
    return OrbifoldSpec(amb, (s,))


def test_codim6_stratum_by_hand():
    spec = _codim6_spec()
    s = spec.strata[0]
    assert sorted(a for a, _ in s.ages) == [0, 1, 2]
    assert s.age_duality()
    assert s.vertical_ranks() == {2: 1, 4: 1}
    page = leray_serre_e2(s)
    assert page.collapses is True
    assert fibre_total_betti(s) == [1, 0, 2, 0, 2, 0, 1, 0]
    expected = (1, 0, 1, 0, 4, 0, 1, 0, 1)
    assert resolution_betti(spec).b == expected == chen_ruan(spec).b
    rep = isentropic_check(spec)
    assert rep.isentropic and rep.branch == "theorem"
    with pytest.raises(HypothesisError):
        full_holonomy_resolution_check(spec)


def test_codim4_collapse_undecided_without_hint():
    s = StratumSpec(4, "su2.cyclic:2", GradedBetti((1, 2, 2, 2, 1)), label="T2xS2")
    assert leray_serre_e2(s).collapses is None
    with pytest.raises(CohomologyDataError):
        fibre_total_betti(s)
    s2 = StratumSpec(4, "su2.cyclic:2", GradedBetti((1, 2, 2, 2, 1)), label="T2xS2", d3_vanishes=True)
    assert fibre_total_betti(s2) == [1, 2, 3, 4, 3, 2, 1, 0]
    k3 = StratumSpec(4, "su2.cyclic:2", GradedBetti((1, 0, 22, 0, 1)), label="K3")
    assert leray_serre_e2(k3).collapses is True


def test_twisted_monodromy_overrides_product():
    s = StratumSpec(4, "su2.cyclic:3", GradedBetti((1, 0, 22, 0, 1)), twisted={2: (1, 0, 10, 0, 1)},
                    d3_vanishes=True)
    assert s.twisted_betti() == {2: [1, 0, 10, 0, 1]}
    assert fibre_total_betti(s) == [1, 0, 23, 0, 11, 0, 1, 0]
    with pytest.raises(CohomologyDataError):
        StratumSpec(4, "su2.cyclic:3", GradedBetti((1, 0, 22, 0, 1)), twisted={4: (1,)}).twisted_betti()


def test_bad_codimension():
    with pytest.raises(CohomologyDataError):
        StratumSpec(5, "su2.cyclic:2", GradedBetti((1, 0, 1, 0)))


def test_ahat_holonomy_moduli():
    t8 = load_spec(DATA / "t8.json").ambient
    k3 = load_spec(DATA / "k3xk3.json").ambient
    assert ahat_genus(t8) == 0 and holonomy_class(ahat_genus(t8)).label == "indeterminate"
    assert moduli_dimension(ahat_genus(t8), t8) == 43
    a = ahat_genus(k3)
    assert a == 4 and holonomy_class(a).label == "Spin(4)" and moduli_dimension(a, k3) == 119
    with pytest.raises(CohomologyDataError):
        holonomy_class(Fraction(1, 2))
    with pytest.raises(CohomologyDataError):
        ahat_genus(GradedBetti((1, 0, 0, 0, 2, 0, 0, 0, 1)))


def test_product_skeleton_is_incomplete():
    spec = load_spec(DATA / "product_t4_k3_z2cubed.json")
    assert spec.ambient is None and len(spec.strata) == 8
    assert len({s.label for s in spec.strata}) == 8
    rep = resolution_report(spec)
    assert "incomplete" in rep and all(e["collapses"] for e in rep["strata"])


@pytest.mark.parametrize("path,mutate", [
    ("/strata/0/codim", lambda d: d["strata"][0].__setitem__("codim", "four")),
    ("/dimension", lambda d: d.__setitem__("dimension", -1)),
    ("/strata/0/twisted_betti", lambda d: d["strata"][0].__setitem__("monodromy", "twisted")),
    ("/ambient", lambda d: d["ambient"].__setitem__("betti", [1, 0, 6, 1, 1])),
])
def test_schema_errors_carry_pointer(path, mutate):
    d = copy.deepcopy(_kummer_dict())
    mutate(d)
    with pytest.raises(SchemaError) as exc:
        spec_from_dict(d)
    assert exc.value.pointer == path


def test_report_is_json_serialisable():
    rep = resolution_report(load_spec(DATA / "kummer_t4.json"))
    assert rep["schema"] == "spin7kit.resolution/1"
    assert rep["resolution_betti"] == [1, 0, 22, 0, 1]
    json.dumps(rep)
