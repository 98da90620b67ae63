from hypothesis import given, settings
from hypothesis import strategies as st

import pytest

from cuspspin.corners import (
    ComplexError,
    FaceRef,
    FacetPairing,
    GluingComplex,
    double,
    doubling_schedule,
    format_face,
    parse_face,
)
from cuspspin.construction import build_sigma, thicken_sigma


@pytest.fixture(scope="module")
def thick():
    return thicken_sigma(build_sigma()).complex


def partition(c):
    return {frozenset(v) for v in c.orbits.values()}


def test_face_names_roundtrip():
    for name in [("H2", "C13"), ("E3",), ()]:
        assert parse_face(format_face(name)) == name
    assert format_face(()) == "cell"


def test_single_pentagon(geo):
    c = GluingComplex(geo.celltype("P2"), 1)
    assert len(c.free_facets) == 5
    vc = c.validate_corners()
    assert vc["pass"] and vc["counts"] == {"boundary-chain(1)": 5}
    assert c.euler_characteristic() == 1


def test_pairing_must_respect_map(geo):
    ct = geo.celltype("P3")
    with pytest.raises(ComplexError):
        GluingComplex(ct, 2, [FacetPairing(FaceRef(0, ("E3",)), FaceRef(1, ("E3",)), "s34")])


def test_facet_used_twice(geo):
    ct = geo.celltype("P2")
    pairs = [FacetPairing(FaceRef(0, ("E3",)), FaceRef(1, ("E3",))), FacetPairing(FaceRef(0, ("E3",)), FaceRef(2, ("E3",)))]
    with pytest.raises(ComplexError):
        GluingComplex(ct, 3, pairs)


@settings(max_examples=20, deadline=None)
@given(st.randoms(use_true_random=False))
def test_orbits_independent_of_order(thick, rnd):
    pairs = list(thick.pairings)
    rnd.shuffle(pairs)
    flipped = [FacetPairing(p.b, p.a, p.map) if rnd.random() < 0.5 else p for p in pairs]
    other = GluingComplex(thick.celltype, thick.n_cells, flipped)
    assert partition(other) == partition(thick)
    assert other.orbit_counts() == thick.orbit_counts()


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=0, max_value=19))
def test_doubling_along_a_component(thick, i):
    comp = thick.facet_components[i]
    d = double(thick, comp)
    assert d.n_cells == 2 * thick.n_cells
    assert len(d.free_facets) == 2 * (len(thick.free_facets) - len(comp.facets))
    assert (d.orientability() is not None) == (thick.orientability() is not None)
    assert d.validate_corners()["pass"]


def test_doubling_identity_counting_ideal_vertices(thick):
    r = doubling_schedule(thick, 2, ideal_policy="include-all")
    for s in r.steps[1:]:
        assert s.euler == s.euler_expected


def test_schedule_k0(thick):
    r = doubling_schedule(thick, 0)
    assert r.final is thick and len(r.steps) == 1
    assert r.projected_cells == thick.n_cells * 2**r.m


def test_memory_guard(thick):
    r = doubling_schedule(thick, 5, memory_guard=40)
    assert r.partial
    assert r.final.n_cells == 32


def test_double_rejects_glued_facet(thick):
    with pytest.raises(ComplexError):
        double(thick, [thick.pairings[0].a])
