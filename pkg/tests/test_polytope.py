import pytest

from cuspspin.exactnum import LorentzVector, R2, R3, minkowski_inner
from cuspspin.polytope import (
    SYMMETRY_A,
    a_permutation,
    adjacency_dot,
    classify_facets,
    combinatorial_automorphisms,
    facet_relation,
    induced_permutation,
    is_lattice_automorphism,
    realize_automorphism,
    standard_p4,
    verify_right_angled,
)


@pytest.fixture(scope="module")
def p(geo):
    return geo.polytope


@pytest.fixture(scope="module")
def lat(geo):
    return geo.lattice


def test_gram_entries(p):
    assert p.gram["E1", "E1"] == 4
    assert p.gram["C12", "C12"] == 1
    assert minkowski_inner(p.normal("E1"), p.normal("E2")) == 0


def test_right_angled(p):
    r = verify_right_angled(p)
    assert r["right_angled"]
    assert set(r["counts"]) <= {"orthogonal", "tangent", "ultraparallel"}


def test_perturbation_breaks_right_angles():
    p = standard_p4()
    bad = p.replace("E1", p.normal("E1") + p.normal("E2"))
    assert not verify_right_angled(bad)["right_angled"]


def test_relation_kinds(p):
    assert facet_relation(p, "E1", "E2").kind == "orthogonal"
    kinds = {facet_relation(p, "E1", x).kind for x in p.labels if x != "E1"}
    assert "tangent" in kinds


def test_f_vector_and_euler(lat):
    f = lat.f_vector()
    assert f[3] == 22 and f[4] == 1
    # ideal vertices are not counted; every count here is a regression value
    assert f == (46, 116, 92, 22, 1)


def test_pentagons(lat):
    pent = [f for f in lat.faces_of_dim(2) if f.compact]
    assert len(pent) == 12
    for f in pent:
        assert len(f.vertices) == 5
        assert all(l.startswith("E") for l in f.facets)


def test_facet_classification(lat):
    a = classify_facets(lat, ("E1",))
    assert (len(a.vertical), len(a.top)) == (10, 11)
    b = classify_facets(lat, ("E1", "E2"), ("E1",))
    assert (len(b.vertical), len(b.top)) == (5, 4)


def test_symmetry_a(p, lat):
    perm = a_permutation(p)
    assert is_lattice_automorphism(lat, perm)
    assert induced_permutation(p, SYMMETRY_A) == perm


def test_automorphisms_are_isometries(p, lat):
    auts = combinatorial_automorphisms(lat)
    assert len(auts) == 48
    for x in auts:
        m = realize_automorphism(p, x)
        assert m.is_isometry()
        assert induced_permutation(p, m) == x


def test_dot_output(lat):
    dot = adjacency_dot(lat)
    assert dot.startswith("graph facets {") and dot.endswith("}")
    assert '"E1" -- "E2";' in dot
