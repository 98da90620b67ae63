"""Small closed manifolds with known intersection forms, used as oracles.

Products are triangulated by the staircase construction: a simplex of
K x L is a chain of vertex pairs increasing in both factors, taken in a
simplex of each. Vertices are numbered lexicographically so every such
chain is increasing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .homology import (
    OrderedSimplicialComplex,
    RegularCW,
    Simplex,
    cup,
    evaluate,
    fundamental_class,
    homology_basis,
    intersection_form,
    intersection_mod2,
    self_intersection_mod2,
)


def circle() -> list[Simplex]:
    return [(0, 1), (1, 2), (0, 2)]


def sphere2() -> list[Simplex]:
    return [s for s in itertools.combinations(range(4), 3)]


def _staircases(p: int, q: int):
    """Monotone lattice paths from (0, 0) to (p, q)."""
    for ups in itertools.combinations(range(p + q), q):
        i = j = 0
        path = [(0, 0)]
        for step in range(p + q):
            if step in ups:
                j += 1
            else:
                i += 1
            path.append((i, j))
        yield path


def product(k_tops: list[Simplex], l_tops: list[Simplex]) -> tuple[list[Simplex], list[tuple]]:
    """Top simplices of K x L and the vertex pairs they are numbered by."""
    kv = sorted({v for s in k_tops for v in s})
    lv = sorted({v for s in l_tops for v in s})
    pairs = [(a, b) for a in kv for b in lv]
    num = {pr: i for i, pr in enumerate(pairs)}
    out = []
    for s in k_tops:
        for t in l_tops:
            for path in _staircases(len(s) - 1, len(t) - 1):
                out.append(tuple(num[s[i], t[j]] for i, j in path))
    return out, pairs


def _power(factors: list[list[Simplex]]) -> tuple[list[Simplex], list[tuple]]:
    tops, labels = factors[0], [(v,) for v in sorted({v for s in factors[0] for v in s})]
    for f in factors[1:]:
        tops, pairs = product(tops, f)
        labels = [labels[a] + (b,) for a, b in pairs]
    return tops, labels


@dataclass
class Fixture:
    name: str
    complex: OrderedSimplicialComplex
    labels: list[tuple]  # vertex -> coordinates in the factors

    def cells_where(self, fixed: dict[int, int], dim: int) -> list[Simplex]:
        """Simplices of the given dimension with the listed factor coordinates constant."""
        out = []
        for s in self.complex.simplices[dim]:
            if all(self.labels[v][i] == c for v in s for i, c in fixed.items()):
                out.append(s)
        return out


def torus2() -> Fixture:
    tops, labels = _power([circle(), circle()])
    return Fixture("T2", OrderedSimplicialComplex(tops, vertex_labels=labels), labels)


def torus4() -> Fixture:
    tops, labels = _power([circle()] * 4)
    return Fixture("T4", OrderedSimplicialComplex(tops, vertex_labels=labels), labels)


def s2xs2() -> Fixture:
    tops, labels = _power([sphere2(), sphere2()])
    return Fixture("S2xS2", OrderedSimplicialComplex(tops, vertex_labels=labels), labels)


def circle_classes(fx: Fixture) -> list[set[Simplex]]:
    """Pull-backs of the generator of H^1(circle) along each factor projection.

    The circle generator is the cochain dual to its edge (0, 2); an edge of
    the product carries it when its projection is that edge.
    """
    n = len(fx.labels[0])
    out = []
    for i in range(n):
        out.append({e for e in fx.complex.simplices[1] if {fx.labels[v][i] for v in e} == {0, 2}})
    return out


def torus_form_by_products(fx: Fixture) -> tuple[list[tuple[int, int]], list[list[int]]]:
    """Brute-force form on the classes x_i ∪ x_j of a torus."""
    xs = circle_classes(fx)
    fund = fundamental_class(fx.complex)
    idx = list(itertools.combinations(range(len(xs)), 2))
    twos = [cup(fx.complex, xs[i], 1, xs[j], 1) for i, j in idx]
    form = [[evaluate(cup(fx.complex, a, 2, b, 2), fund) for b in twos] for a in twos]
    return idx, form


def standard_torus_form(n: int) -> tuple[list[tuple[int, int]], list[list[int]]]:
    idx = list(itertools.combinations(range(n), 2))
    full = set(range(n))
    return idx, [[int(set(a) | set(b) == full and not set(a) & set(b)) for b in idx] for a in idx]


def is_hyperbolic_mod2(m: list[list[int]]) -> bool:
    """Symmetric, even (zero diagonal) and nonsingular over Z/2: a sum of hyperbolic planes."""
    n = len(m)
    if any(m[i][j] != m[j][i] for i in range(n) for j in range(n)) or any(m[i][i] for i in range(n)):
        return False
    a = [row[:] for row in m]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] % 2), None)
        if piv is None:
            return False
        a[col], a[piv] = a[piv], a[col]
        for r in range(n):
            if r != col and a[r][col] % 2:
                a[r] = [(x + y) % 2 for x, y in zip(a[r], a[col])]
    return True


def fixture_surfaces(fx: Fixture) -> tuple[RegularCW, list[int], list[int]]:
    """S2 x pt and pt x S2 in S2 x S2 as 2-cells of the complex viewed as a CW."""
    cw = fx.complex.as_cw()
    pos = {k: i for i, k in enumerate(cw.keys)}
    first = [pos[s] for s in fx.cells_where({1: 0}, 2)]
    second = [pos[s] for s in fx.cells_where({0: 0}, 2)]
    return cw, first, second


def oracle_suite() -> list[dict]:
    """Fixture checks: each row has a name, the computed value and the expected one."""
    rows = []
    t2 = torus2()
    rows.append({"name": "T2 intersection form", "value": intersection_form(t2.complex), "expected": [[0, 1], [1, 0]]})
    s = s2xs2()
    rows.append({"name": "S2xS2 betti", "value": s.complex.chain_complex().betti(), "expected": [1, 0, 2, 0, 1]})
    form = intersection_form(s.complex)
    rows.append({"name": "S2xS2 form hyperbolic", "value": is_hyperbolic_mod2(form) and len(form) == 2, "expected": True})
    cw, a, b = fixture_surfaces(s)
    rows.append({"name": "S2xS2 (S2 x pt).(pt x S2)", "value": intersection_mod2(cw, a, b), "expected": 1})
    rows.append({"name": "S2xS2 (S2 x pt)^2", "value": self_intersection_mod2(cw, a, subdivide=False).value, "expected": 0})
    t4 = torus4()
    rows.append({"name": "T4 b2", "value": t4.complex.chain_complex().betti()[2], "expected": 6})
    rows.append({"name": "T4 form by products", "value": torus_form_by_products(t4)[1], "expected": standard_torus_form(4)[1]})
    form4 = intersection_form(t4.complex)
    rows.append({"name": "T4 form hyperbolic", "value": is_hyperbolic_mod2(form4) and len(form4) == 6, "expected": True})
    for r in rows:
        r["pass"] = r["value"] == r["expected"]
    return rows
