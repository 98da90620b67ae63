"""The right-angled polytope P4 in the hyperboloid model and its combinatorics.

Facets are labelled as in the standard table (E1..E4, E1'..E4', H1..H4,
H1'..H4', C12..C34). A face is named by the sorted tuple of labels of the
facets that contain it; the 2-face ``("E1", "E2")`` is the pentagon P2 and
the facet ``("E1",)`` is P3.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import isqrt
from typing import Iterable, Mapping, Sequence

from .exactnum import (
    ONE,
    R2,
    R3,
    T,
    ZERO,
    FieldElement,
    Isometry,
    LorentzVector,
    _rref,
    minkowski_inner,
    solve_linear,
)

LABELS: tuple[str, ...] = (
    "E1", "E2", "E3", "E4", "E1'", "E2'", "E3'", "E4'",
    "H1", "H2", "H3", "H4", "H1'", "H2'", "H3'", "H4'",
    "C12", "C13", "C14", "C23", "C24", "C34",
)  # fmt: skip
_ORDER = {lab: i for i, lab in enumerate(LABELS)}

FaceName = tuple  # sorted tuple of facet labels


def label_key(label: str) -> tuple[int, str]:
    return (_ORDER.get(label, len(_ORDER)), label)


def face_name(labels: Iterable[str]) -> FaceName:
    return tuple(sorted(set(labels), key=label_key))


class PolytopeError(ValueError):
    pass


@dataclass(frozen=True)
class HalfSpace:
    label: str
    normal: LorentzVector

    def __post_init__(self):
        if self.normal.norm2().sign() <= 0:
            raise PolytopeError(f"normal of {self.label} is not spacelike")


@dataclass(frozen=True)
class FacetRelation:
    kind: str  # orthogonal | angled | tangent | ultraparallel
    cos2: FieldElement

    def __str__(self) -> str:
        return self.kind


@dataclass(frozen=True)
class Vertex:
    id: int
    representative: LorentzVector
    kind: str  # finite | ideal
    facets: frozenset

    @property
    def name(self) -> FaceName:
        return face_name(self.facets)


@dataclass(frozen=True)
class Face:
    dim: int
    facets: FaceName
    vertices: frozenset
    compact: bool

    @property
    def name(self) -> FaceName:
        return self.facets


class Polytope:
    """Intersection of half-spaces ``<x, v> <= 0`` on the upper hyperboloid sheet."""

    def __init__(self, halfspaces: Sequence[HalfSpace]):
        labels = [h.label for h in halfspaces]
        if len(set(labels)) != len(labels):
            raise PolytopeError("half-space labels must be unique")
        self.halfspaces: tuple[HalfSpace, ...] = tuple(halfspaces)
        self._by_label = {h.label: h for h in self.halfspaces}

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(h.label for h in self.halfspaces)

    def normal(self, label: str) -> LorentzVector:
        return self._by_label[label].normal

    def __len__(self) -> int:
        return len(self.halfspaces)

    def replace(self, label: str, normal: LorentzVector) -> Polytope:
        return Polytope([HalfSpace(h.label, normal) if h.label == label else h for h in self.halfspaces])

    @cached_property
    def gram(self) -> dict[tuple[str, str], FieldElement]:
        g = {}
        for h in self.halfspaces:
            for k in self.halfspaces:
                g[h.label, k.label] = minkowski_inner(h.normal, k.normal)
        return g

    @cached_property
    def relations(self) -> dict[tuple[str, str], FacetRelation]:
        out = {}
        for i, j in itertools.combinations(self.labels, 2):
            rel = facet_relation(self, i, j)
            out[i, j] = out[j, i] = rel
        return out


def _vec(*coords) -> LorentzVector:
    return LorentzVector(coords)


def standard_p4() -> Polytope:
    """The 22 half-spaces of P4."""
    s2, s3 = R2, R3
    rows = {
        "E1": (s2, 1, 1, 1, s3),
        "E2": (s2, 1, -1, -1, s3),
        "E3": (s2, -1, 1, -1, s3),
        "E4": (s2, -1, -1, 1, s3),
        "E1'": (s2, -1, -1, -1, -s3),
        "E2'": (s2, -1, 1, 1, -s3),
        "E3'": (s2, 1, -1, 1, -s3),
        "E4'": (s2, 1, 1, -1, -s3),
        "H1": (s2, -1, -1, -1, T),
        "H2": (s2, -1, 1, 1, T),
        "H3": (s2, 1, -1, 1, T),
        "H4": (s2, 1, 1, -1, T),
        "H1'": (s2, 1, 1, 1, -T),
        "H2'": (s2, 1, -1, -1, -T),
        "H3'": (s2, -1, 1, -1, -T),
        "H4'": (s2, -1, -1, 1, -T),
        "C12": (1, s2, 0, 0, 0),
        "C13": (1, 0, s2, 0, 0),
        "C14": (1, 0, 0, s2, 0),
        "C23": (1, 0, 0, -s2, 0),
        "C24": (1, 0, -s2, 0, 0),
        "C34": (1, -s2, 0, 0, 0),
    }
    return Polytope([HalfSpace(lab, _vec(*rows[lab])) for lab in LABELS])


def facet_relation(p: Polytope, i: str, j: str) -> FacetRelation:
    """Exact angle classification of two facets by the squared cosine."""
    if i == j:
        raise PolytopeError("facet_relation needs two distinct facets")
    u, v = p.normal(i), p.normal(j)
    uv = minkowski_inner(u, v)
    cos2 = uv * uv / (minkowski_inner(u, u) * minkowski_inner(v, v))
    if uv.is_zero():
        return FacetRelation("orthogonal", cos2)
    c = (cos2 - 1).sign()
    if c < 0:
        return FacetRelation("angled", cos2)
    if uv.sign() > 0:
        # cos^2 >= 1 with positive product: the half-spaces are nested, not a face pair
        return FacetRelation("angled", cos2)
    return FacetRelation("tangent" if c == 0 else "ultraparallel", cos2)


def verify_right_angled(p: Polytope) -> dict:
    pairs = {}
    for i, j in itertools.combinations(p.labels, 2):
        pairs[i, j] = facet_relation(p, i, j).kind
    angled = [k for k, v in pairs.items() if v == "angled"]
    counts: dict[str, int] = {}
    for v in pairs.values():
        counts[v] = counts.get(v, 0) + 1
    return {"right_angled": not angled, "angled": angled, "counts": counts, "pairs": pairs}


def rational_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def field_sqrt_of_rational(q: FieldElement) -> FieldElement | None:
    """sqrt(q) for rational q > 0 when it lies in Q(sqrt2, sqrt3)."""
    if not q.is_rational() or q.a <= 0:
        return None
    for k, unit in ((1, ONE), (2, R2), (3, R3), (6, FieldElement(0, 0, 0, 1))):
        r = rational_sqrt(q.a / k)
        if r is not None:
            return unit * r
    return None


def _normalize_vertex(x: LorentzVector) -> LorentzVector:
    x = x.primitive()
    n = x.norm2()
    if n.sign() < 0:
        root = field_sqrt_of_rational(-n)
        if root is not None:
            return x.scale(1 / root)
    return x


def vertices(p: Polytope) -> list[Vertex]:
    """All finite and ideal vertices with their containing-facet sets.

    Candidate 4-subsets are restricted to facets that pairwise meet or are
    tangent; two ultraparallel facets cannot share a point, even at infinity.
    """
    rep = verify_right_angled(p)
    if not rep["right_angled"]:
        raise PolytopeError(f"polytope is not right-angled: {rep['angled'][:3]}")
    rel = p.relations
    labels = p.labels
    compatible = {
        (i, j) for (i, j), r in rel.items() if r.kind in ("orthogonal", "tangent")
    }
    found: dict[LorentzVector, Vertex] = {}
    for quad in itertools.combinations(labels, 4):
        if any((i, j) not in compatible for i, j in itertools.combinations(quad, 2)):
            continue
        ker = solve_linear([p.normal(lab) for lab in quad])
        if len(ker) != 1:
            continue
        x = ker[0]
        n = x.norm2()
        if n.sign() > 0:
            continue
        if x[0].sign() < 0:
            x = -x
        if x[0].sign() == 0:
            continue
        prods = {lab: minkowski_inner(x, p.normal(lab)) for lab in labels}
        if any(v.sign() > 0 for v in prods.values()):
            continue
        x = _normalize_vertex(x)
        if x in found:
            continue
        on = frozenset(lab for lab, v in prods.items() if v.is_zero())
        kind = "ideal" if n.is_zero() else "finite"
        found[x] = Vertex(-1, x, kind, on)
    ordered = sorted(found.values(), key=lambda v: (v.kind != "finite", [label_key(l) for l in face_name(v.facets)]))
    return [Vertex(i, v.representative, v.kind, v.facets) for i, v in enumerate(ordered)]


class FaceLattice:
    """Graded poset of faces of a polytope."""

    def __init__(self, polytope: Polytope, verts: Sequence[Vertex], faces: Sequence[Face]):
        self.polytope = polytope
        self.vertices: tuple[Vertex, ...] = tuple(verts)
        self.faces: tuple[Face, ...] = tuple(sorted(faces, key=lambda f: (f.dim, [label_key(l) for l in f.facets])))
        self.by_name: dict[FaceName, Face] = {f.name: f for f in self.faces}
        self.by_vertices: dict[frozenset, Face] = {f.vertices: f for f in self.faces}
        self.dim = max(f.dim for f in self.faces)

    def __getitem__(self, name) -> Face:
        return self.by_name[face_name(name) if not isinstance(name, tuple) else name]

    def __contains__(self, name) -> bool:
        return name in self.by_name

    def faces_of_dim(self, d: int) -> list[Face]:
        return [f for f in self.faces if f.dim == d]

    def f_vector(self) -> tuple[int, ...]:
        return tuple(len(self.faces_of_dim(d)) for d in range(self.dim + 1))

    def subfaces(self, face: Face) -> list[Face]:
        """All faces contained in ``face`` (itself included)."""
        return [g for g in self.faces if g.vertices <= face.vertices and g.dim <= face.dim]

    def facets_of(self, face: Face) -> list[Face]:
        return [g for g in self.subfaces(face) if g.dim == face.dim - 1]

    def meet(self, f: Face, g: Face) -> Face | None:
        return self.by_vertices.get(f.vertices & g.vertices)

    @cached_property
    def ideal_vertex_ids(self) -> frozenset:
        return frozenset(v.id for v in self.vertices if v.kind == "ideal")

    @cached_property
    def facet_adjacency(self) -> dict[str, frozenset]:
        """Facets sharing a ridge (codimension-2 face)."""
        adj: dict[str, set] = {lab: set() for lab in self.polytope.labels}
        for f in self.faces_of_dim(self.dim - 2):
            if len(f.facets) == 2:
                i, j = f.facets
                adj[i].add(j)
                adj[j].add(i)
        return {k: frozenset(v) for k, v in adj.items()}


def face_lattice(p: Polytope, verts: Sequence[Vertex] | None = None) -> FaceLattice:
    """Faces as intersections of facet vertex sets, graded by chain length."""
    if len(p) == 0:
        raise PolytopeError("empty polytope")
    if verts is None:
        verts = vertices(p)
    if not verts:
        raise PolytopeError("polytope has no vertices")
    vsets = {lab: frozenset(v.id for v in verts if lab in v.facets) for lab in p.labels}
    all_ids = frozenset(v.id for v in verts)
    sets: set[frozenset] = {s for s in vsets.values() if s}
    frontier = set(sets)
    while frontier:
        new = set()
        for s in frontier:
            for t in vsets.values():
                u = s & t
                if u and u not in sets:
                    new.add(u)
        sets |= new
        frontier = new
    sets.add(all_ids)
    for v in verts:
        sets.add(frozenset([v.id]))
    ideal = {v.id for v in verts if v.kind == "ideal"}
    # grade by longest chain of proper subsets
    order = sorted(sets, key=len)
    dim: dict[frozenset, int] = {}
    for s in order:
        below = [dim[t] for t in order if len(t) < len(s) and t < s]
        dim[s] = 1 + max(below) if below else 0
    faces = []
    for s in sets:
        labels = face_name(lab for lab, vs in vsets.items() if s <= vs)
        faces.append(Face(dim[s], labels, s, not (s & ideal)))
    return FaceLattice(p, verts, faces)


@dataclass(frozen=True)
class FacetClassification:
    base: FaceName
    bottom: FaceName
    vertical: tuple
    top: tuple


def polytope_facets(lattice: FaceLattice, base: Face) -> list[Face]:
    return [g for g in lattice.faces if g.dim == base.dim - 1 and g.vertices <= base.vertices]


def classify_facets(lattice: FaceLattice, bottom, base=()) -> FacetClassification:
    """Split the facets of ``base`` other than ``bottom`` into vertical and top.

    Vertical facets meet ``bottom`` in a codimension-2 face of ``base``.
    """
    base_face = lattice.by_name.get(face_name(base))
    bottom_face = lattice.by_name.get(face_name(bottom))
    if base_face is None or bottom_face is None:
        raise PolytopeError("bottom or base is not a face")
    facets = polytope_facets(lattice, base_face)
    if bottom_face not in facets:
        raise PolytopeError(f"{bottom_face.name} is not a facet of {base_face.name}")
    vertical, top = [], []
    for g in facets:
        if g == bottom_face:
            continue
        m = lattice.meet(g, bottom_face)
        if m is not None and m.dim == base_face.dim - 2:
            vertical.append(g.name)
        else:
            top.append(g.name)
    return FacetClassification(base_face.name, bottom_face.name, tuple(vertical), tuple(top))


def apply_symmetry_a(v: LorentzVector) -> LorentzVector:
    """``a(x0, x1, ..., x4) = (x0, -x1, ..., -x4)``."""
    return LorentzVector([v[0]] + [-c for c in v.x[1:]])


SYMMETRY_A = Isometry.diagonal([1, -1, -1, -1, -1])


def _same_ray(u: LorentzVector, v: LorentzVector) -> bool:
    return u.primitive() == v.primitive() and _first_sign(u) == _first_sign(v)


def _first_sign(v: LorentzVector) -> int:
    for c in v:
        if c:
            return c.sign()
    return 0


def induced_permutation(p: Polytope, iso: Isometry) -> dict[str, str] | None:
    """Facet permutation induced by an isometry, or None if it does not preserve P."""
    rays = {lab: p.normal(lab).primitive() for lab in p.labels}
    sign_of = {lab: _first_sign(p.normal(lab)) for lab in p.labels}
    lookup = {(r, sign_of[lab]): lab for lab, r in rays.items()}
    perm = {}
    for lab in p.labels:
        img = iso.apply(p.normal(lab))
        key = (img.primitive(), _first_sign(img))
        if key not in lookup:
            return None
        perm[lab] = lookup[key]
    return perm


def is_lattice_automorphism(lattice: FaceLattice, perm: Mapping[str, str]) -> bool:
    names = set(lattice.by_name)
    return all(face_name(perm[l] for l in f.facets) in names for f in lattice.faces)


def combinatorial_automorphisms(lattice: FaceLattice) -> list[dict[str, str]]:
    """Facet permutations extending to face-lattice automorphisms.

    Backtracking over the facet adjacency graph; a partial assignment must
    preserve adjacency and tangency (sharing only an ideal vertex) with
    all previously placed facets.
    """
    labels = list(lattice.polytope.labels)
    adj = lattice.facet_adjacency
    share_vertex: dict[str, set] = {lab: set() for lab in labels}
    for v in lattice.vertices:
        for i in v.facets:
            share_vertex[i] |= v.facets - {i}
    relation = {}
    for i in labels:
        for j in labels:
            if i != j:
                relation[i, j] = 2 if j in adj[i] else (1 if j in share_vertex[i] else 0)

    def profile(lab: str) -> tuple:
        pent = sum(1 for f in lattice.faces_of_dim(2) if f.compact and lab in f.facets)
        return (len(adj[lab]), len(share_vertex[lab]), pent)

    prof = {lab: profile(lab) for lab in labels}
    # place facets in BFS order so each new facet has placed neighbours
    order = [labels[0]]
    seen = {labels[0]}
    while len(order) < len(labels):
        for lab in list(order):
            for nb in sorted(adj[lab], key=label_key):
                if nb not in seen:
                    seen.add(nb)
                    order.append(nb)
        rest = [l for l in labels if l not in seen]
        if rest and len(order) < len(labels) and all(
            nb in seen for lab in order for nb in adj[lab]
        ):
            order.append(rest[0])
            seen.add(rest[0])
    results: list[dict[str, str]] = []

    def extend(k: int, perm: dict[str, str], used: set):
        if k == len(order):
            if is_lattice_automorphism(lattice, perm):
                results.append(dict(perm))
            return
        src = order[k]
        for tgt in labels:
            if tgt in used or prof[tgt] != prof[src]:
                continue
            if any(relation[src, s] != relation[tgt, perm[s]] for s in order[:k]):
                continue
            perm[src] = tgt
            used.add(tgt)
            extend(k + 1, perm, used)
            used.discard(tgt)
            del perm[src]

    extend(0, {}, set())
    results.sort(key=lambda pm: [label_key(pm[l]) for l in labels])
    return results


class RealizationError(PolytopeError):
    pass


def realize_automorphism(p: Polytope, perm: Mapping[str, str]) -> Isometry:
    """The isometry sending each facet normal to a positive multiple of its image.

    Isometries preserve the form, so the multiple for facet F is
    ``sqrt(<v_F, v_F> / <v_perm(F), v_perm(F)>)``; it lies in the field for
    this table. The matrix is solved from five independent normals and
    checked against all of them.
    """
    labels = p.labels
    scaled = {}
    for lab in labels:
        ratio = p.normal(lab).norm2() / p.normal(perm[lab]).norm2()
        lam = field_sqrt_of_rational(ratio)
        if lam is None:
            raise RealizationError(f"scale factor for {lab} leaves the field")
        scaled[lab] = p.normal(perm[lab]).scale(lam)
    # choose 5 independent source normals
    basis: list[str] = []
    for lab in labels:
        trial = basis + [lab]
        red, piv = _rref([list(p.normal(l)) for l in trial], 5)
        if len(piv) == len(trial):
            basis = trial
        if len(basis) == 5:
            break
    if len(basis) < 5:
        raise RealizationError("facet normals do not span R^{1,4}")
    # M * A = B where columns of A are source normals, columns of B targets;
    # transpose: A^T M^T = B^T, solve column by column via augmented rref
    aug = [list(p.normal(l)) + list(scaled[l]) for l in basis]
    red, piv = _rref(aug, 5)
    mt = [row[5:] for row in red]  # rows of M^T
    m = Isometry([[mt[j][i] for j in range(5)] for i in range(5)])
    for lab in labels:
        if m.apply(p.normal(lab)) != scaled[lab]:
            raise RealizationError(f"no linear map realises the permutation at {lab}")
    if not m.is_isometry():
        raise RealizationError("realising matrix is not an isometry of H4")
    return m


def a_permutation(p: Polytope) -> dict[str, str]:
    perm = induced_permutation(p, SYMMETRY_A)
    if perm is None:
        raise PolytopeError("symmetry a does not preserve the polytope")
    return perm


def gram_text(p: Polytope) -> list[str]:
    lines = []
    for i, j in itertools.combinations(p.labels, 2):
        r = facet_relation(p, i, j)
        lines.append(f"{i} {j} {r.kind} <u,v>={p.gram[i, j]} cos2={r.cos2}")
    return lines


def adjacency_dot(lattice: FaceLattice) -> str:
    lines = ["graph facets {"]
    for lab in lattice.polytope.labels:
        lines.append(f'  "{lab}";')
    for lab in lattice.polytope.labels:
        for nb in sorted(lattice.facet_adjacency[lab], key=label_key):
            if label_key(lab) < label_key(nb):
                lines.append(f'  "{lab}" -- "{nb}";')
    lines.append("}")
    return "\n".join(lines)
