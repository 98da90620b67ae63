"""Acceptance gate: one test per pipeline stage, each within its time budget."""

import random
import time

from cuspspin import construction as cons
from cuspspin.corners import doubling_schedule
from cuspspin.exactnum import Isometry
from cuspspin.fixtures import (
    fixture_surfaces,
    is_hyperbolic_mod2,
    s2xs2,
    standard_torus_form,
    torus2,
    torus4,
    torus_form_by_products,
)
from cuspspin.homology import (
    boundary_chain,
    coboundary,
    cup,
    intersection_form,
    intersection_mod2,
    self_intersection_mod2,
    truncate_ideal,
)
from cuspspin.polytope import (
    SYMMETRY_A,
    a_permutation,
    classify_facets,
    combinatorial_automorphisms,
    face_lattice,
    is_lattice_automorphism,
    realize_automorphism,
    standard_p4,
    verify_right_angled,
    vertices,
)

AUTOMORPHISMS = 48
FACET_COMPONENTS_X = 113


def test_polytope_stage():
    t0 = time.perf_counter()
    p = standard_p4()
    assert len(p) == 22
    assert verify_right_angled(p)["angled"] == []
    lat = face_lattice(p, vertices(p))
    pent = [f for f in lat.faces_of_dim(2) if f.compact]
    assert len(pent) == 12
    for f in pent:
        assert len(f.vertices) == 5
        i, j = f.facets
        assert i[0] == j[0] == "E" and i.endswith("'") == j.endswith("'")
    over_p3 = classify_facets(lat, ("E1",))
    assert (len(over_p3.vertical), len(over_p3.top)) == (10, 11)
    over_p2 = classify_facets(lat, ("E1", "E2"), ("E1",))
    assert (len(over_p2.vertical), len(over_p2.top)) == (5, 4)
    assert time.perf_counter() - t0 < 5


def test_symmetry_stage():
    t0 = time.perf_counter()
    p = standard_p4()
    lat = face_lattice(p, vertices(p))
    assert SYMMETRY_A == Isometry.diagonal([1, -1, -1, -1, -1])
    assert is_lattice_automorphism(lat, a_permutation(p))
    auts = combinatorial_automorphisms(lat)
    assert all(realize_automorphism(p, x).is_isometry() for x in auts)
    assert len(auts) == AUTOMORPHISMS
    assert time.perf_counter() - t0 < 60


def test_construction_stage():
    t0 = time.perf_counter()
    cons.geometry.cache_clear()
    k = cons.build_all()
    checks = {c.name: c for c in cons.verify_all(k)}
    wanted = [
        "sigma.holed_torus",
        "sigmathick.census",
        "N0.top_facets",
        "N0.closed_corners",
        "N12.top_facets",
        "N0.sigma_cells",
        "N12.sigma_cells",
        "N12.S12.boundary",
        "X.corners",
        "X.embedded",
    ]
    failed = [f"{n}: {checks[n].details}" for n in wanted if not checks[n].passed]
    assert time.perf_counter() - t0 < 60
    assert not failed, "; ".join(failed)


def test_homology_oracles():
    t0 = time.perf_counter()
    assert intersection_form(torus2().complex) == [[0, 1], [1, 0]]
    s = s2xs2()
    form = intersection_form(s.complex)
    assert len(form) == 2 and is_hyperbolic_mod2(form)
    cw, a, b = fixture_surfaces(s)
    assert intersection_mod2(cw, a, b) == 1
    t4 = torus4()
    kx = t4.complex
    assert kx.chain_complex().betti()[2] == 6
    assert torus_form_by_products(t4)[1] == standard_torus_form(4)[1]
    assert is_hyperbolic_mod2(intersection_form(kx))
    rnd = random.Random(0)
    for _ in range(100):
        p = rnd.randint(0, 2)
        q = rnd.randint(0, 3 - p)
        x = {s for s in kx.simplices[p] if rnd.random() < 0.1}
        y = {s for s in kx.simplices[q] if rnd.random() < 0.1}
        lhs = coboundary(kx, cup(kx, x, p, y, q), p + q)
        rhs = cup(kx, coboundary(kx, x, p), p + 1, y, q) ^ cup(kx, x, p, coboundary(kx, y, q), q + 1)
        assert lhs == rhs
        assert not coboundary(kx, coboundary(kx, x, p), p + 1)
        c = {s for s in kx.simplices[p + 2] if rnd.random() < 0.1}
        assert not boundary_chain(boundary_chain(c))
    assert time.perf_counter() - t0 < 120


def test_self_intersection():
    t0 = time.perf_counter()
    x = cons.build_x()
    tc = truncate_ideal(x.complex)
    cells = [tc.face(f) for f in x.surfaces["S"].faces]
    r = self_intersection_mod2(tc.cw, cells, variants=True, subdivide=True)
    assert {e["run"] for e in r.runs} >= {"base", "re-solve", "reverse-order", "subdivided"}
    assert r.stable
    assert r.value == 1
    assert time.perf_counter() - t0 < 30 * 60


def test_doubling_identities():
    t0 = time.perf_counter()
    sigma = cons.build_sigma()
    for b in (cons.thicken_sigma(sigma), cons.build_x()):
        r = doubling_schedule(b.complex, 3)
        assert not r.partial and len(r.steps) == 4
        for s in r.steps[1:]:
            assert s.euler == s.euler_expected
            assert s.cells == b.complex.n_cells * 2**s.k
        if b.name == "X":
            assert r.m == FACET_COMPONENTS_X
    assert time.perf_counter() - t0 < 60
