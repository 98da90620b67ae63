"""The specific complexes: the surface Sigma, its thickening, the 3-manifolds
N0, N1, N2, N12 and the 4-manifold X, built from shipped gluing tables.

Gluing tables are plain text, one directive per line::

    complex <name> polytope <P2|P3|P4> cells <n>
    pair <a>.<facet> <b>.<facet> map <identity|isometry>
    thicken <table>                      # P2 -> P3 (same cells) or P3 -> P4 (cells doubled)
    include <table> offset <k> [marks <m1,m2,...>]
    graft <table> thicken map <isometry> # P3 table thickened and mapped into this complex
    identify <graft cell> <cell>
    mark gamma<i> <cell>.<edge> ...
    mark surface <name> <cell>.<face><+|-> ...
    mark union <name> <surface> <surface> ...
    mark boundary <surface> <gamma> ...

Faces are written by local label lists as in :mod:`cuspspin.corners`
(``0.E3``, ``2.H2,C13``, ``5.cell``). Marks travel with the faces they
name: thickening keeps the geometric face, so a marked edge of Sigma
becomes the corresponding edge of the thickened complex.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable

from .corners import (
    BASES,
    CellType,
    ComplexError,
    FaceRef,
    FacetPairing,
    GluingComplex,
    NamedIsometry,
    UnionFind,
    format_face,
    parse_face,
)
from .exactnum import Isometry
from .polytope import (
    FaceLattice,
    Polytope,
    combinatorial_automorphisms,
    face_lattice,
    face_name,
    label_key,
    realize_automorphism,
    standard_p4,
    vertices,
)


# frozen from the first verified build
GENUS_S = 3


class TableError(ComplexError):
    pass


# ---------------------------------------------------------------------------
# shared geometry


@dataclass
class Geometry:
    polytope: Polytope
    lattice: FaceLattice
    isometries: dict[str, NamedIsometry]
    matrices: dict[str, Isometry]
    _types: dict[str, CellType] = field(default_factory=dict)

    def celltype(self, level: str) -> CellType:
        if level not in self._types:
            self._types[level] = CellType(self.lattice, level, list(self.isometries.values()))
        return self._types[level]


def _sign_of(x) -> int:
    s = x.sign()
    if s == 0:
        raise ComplexError("degenerate isometry")
    return s


@lru_cache(maxsize=None)
def geometry() -> Geometry:
    """P4 with the isometries used as attaching maps.

    ``s34`` fixes E1 and E2 and swaps E3 with E4; ``f12`` swaps E1 with E2
    and fixes every facet through an edge of the pentagon E1 ∩ E2.
    """
    p = standard_p4()
    lat = face_lattice(p, vertices(p))
    auts = combinatorial_automorphisms(lat)
    s34 = _unique(auts, {"E1": "E1", "E2": "E2", "E3": "E4"}, "s34")
    f12 = pentagon_swap(lat, ("E1", "E2"), auts)
    isos, mats = {}, {}
    for name, perm in (("s34", s34), ("f12", f12)):
        m = realize_automorphism(p, perm)
        mats[name] = m
        isos[name] = NamedIsometry(name, dict(perm), _sign_of(m.det()))
    return Geometry(p, lat, isos, mats)


def _unique(auts: list[dict], constraint: dict[str, str], what: str) -> dict:
    hits = [a for a in auts if all(a[k] == v for k, v in constraint.items())]
    if len(hits) != 1:
        raise ComplexError(f"{what}: expected one automorphism, found {len(hits)}")
    return hits[0]


def pentagon_swap(lattice: FaceLattice, pentagon: tuple[str, str], auts: list[dict] | None = None) -> dict:
    """Automorphism exchanging the two facets through a compact pentagon.

    Prefers the one fixing each facet that cuts an edge of the pentagon
    (so the pentagon is fixed pointwise); otherwise the lexicographically
    least swap.
    """
    if auts is None:
        auts = combinatorial_automorphisms(lattice)
    i, j = pentagon
    swaps = [a for a in auts if a[i] == j and a[j] == i]
    if not swaps:
        raise ComplexError(f"no automorphism exchanges {i} and {j}")
    face = lattice.by_name[face_name(pentagon)]
    edge_facets = set()
    for e in lattice.facets_of(face):
        edge_facets |= set(e.facets) - {i, j}
    fixing = [a for a in swaps if all(a[l] == l for l in edge_facets)]
    pool = fixing or swaps
    labels = lattice.polytope.labels
    return min(pool, key=lambda a: [label_key(a[l]) for l in labels])


@dataclass
class PentagonSwap:
    pentagon: tuple
    facets: tuple[str, str]
    permutation: dict
    matrix: Isometry
    fixes_pointwise: bool
    involution: bool


def pentagon_sharing_check(F, lattice: FaceLattice | None = None, polytope: Polytope | None = None) -> PentagonSwap:
    """The two facets through a compact pentagon and a realised isometry swapping them."""
    g = geometry() if lattice is None else None
    lat = lattice or g.lattice
    p = polytope or (g.polytope if g else lat.polytope)
    name = face_name(F)
    face = lat.by_name.get(name)
    if face is None or face.dim != 2 or not face.compact or len(name) != 2:
        raise ComplexError(f"{name} is not a compact pentagon")
    perm = pentagon_swap(lat, name)
    m = realize_automorphism(p, perm)
    edge_facets = set()
    for e in lat.facets_of(face):
        edge_facets |= set(e.facets) - set(name)
    sq = m @ m
    return PentagonSwap(
        name,
        tuple(name),
        perm,
        m,
        all(perm[l] == l for l in edge_facets),
        all(perm[perm[l]] == l for l in name) and sq.apply(p.normal(name[0])) == p.normal(name[0]),
    )


def compact_pentagons(lattice: FaceLattice) -> list[tuple]:
    return [f.name for f in lattice.faces_of_dim(2) if f.compact]


# ---------------------------------------------------------------------------
# surfaces and theta graph


@dataclass
class SurfaceTrack:
    name: str
    faces: list[FaceRef]
    signs: dict[FaceRef, int] = field(default_factory=dict)
    boundary: tuple[str, ...] = ()  # names of gamma curves making up the declared boundary

    def shifted(self, offset: int) -> SurfaceTrack:
        sh = lambda r: FaceRef(r.cell + offset, r.face)
        return SurfaceTrack(self.name, [sh(f) for f in self.faces], {sh(f): s for f, s in self.signs.items()}, self.boundary)


@dataclass
class ThetaGraph:
    """Three closed curves gamma0, gamma1, gamma2 built from three arcs.

    Each gamma is a set of edge references; pairwise intersections are the
    arcs and the arc endpoints are the two trivalent vertices.
    """

    gammas: tuple[list[FaceRef], list[FaceRef], list[FaceRef]]

    def arcs(self, c: GluingComplex) -> dict[str, set[int]]:
        g = [{c.orbit(e) for e in gam} for gam in self.gammas]
        return {"a": g[0] & g[2], "b": g[0] & g[1], "c": g[1] & g[2]}

    def validate(self, c: GluingComplex) -> dict:
        ct = c.celltype
        g = [{c.orbit(e) for e in gam} for gam in self.gammas]
        arcs = self.arcs(c)
        union = set().union(*g)
        # every edge of the union lies in exactly two gammas
        two_each = all(sum(e in gi for gi in g) == 2 for e in union)
        disjoint = not (arcs["a"] & arcs["b"] or arcs["b"] & arcs["c"] or arcs["a"] & arcs["c"])
        ends: dict[int, set[int]] = {}
        for gam in self.gammas:
            for e in gam:
                ends[c.orbit(e)] = {
                    c.orbit(FaceRef(e.cell, v)) for v in ct.subfaces[e.face] if ct.dim_of[v] == 0
                }
        degree: dict[int, int] = defaultdict(int)
        for e in union:
            for v in ends[e]:
                degree[v] += 1
        trivalent = sorted(v for v, d in degree.items() if d == 3)
        others_ok = all(d == 2 for v, d in degree.items() if d != 3)
        arc_ok = True
        for arc in arcs.values():
            deg: dict[int, int] = defaultdict(int)
            for e in arc:
                for v in ends[e]:
                    deg[v] += 1
            odd = sorted(v for v, d in deg.items() if d == 1)
            arc_ok &= odd == trivalent and _connected(arc, ends)
        return {
            "pass": two_each and disjoint and len(trivalent) == 2 and others_ok and arc_ok and _connected(union, ends),
            "trivalent_vertices": len(trivalent),
            "arcs": {k: len(v) for k, v in arcs.items()},
            "edges": len(union),
        }


def _connected(edges: set[int], ends: dict[int, set[int]]) -> bool:
    edges = list(edges)
    if not edges:
        return False
    uf = UnionFind(len(edges))
    first: dict[int, int] = {}
    for i, e in enumerate(edges):
        for v in ends[e]:
            if v in first:
                uf.union(first[v], i)
            else:
                first[v] = i
    return len({uf.find(i) for i in range(len(edges))}) == 1


def polygon_cycle(ct: CellType, face) -> list:
    """Vertices of a 2-face in cyclic order (local names)."""
    edges = [e for e in ct.subfaces[face] if ct.dim_of[e] == 1]
    ev = {e: [v for v in ct.subfaces[e] if ct.dim_of[v] == 0] for e in edges}
    cyc = list(ev[edges[0]])
    used = {edges[0]}
    while len(used) < len(edges):
        nxt = next(e for e in edges if e not in used and cyc[-1] in ev[e])
        used.add(nxt)
        v = next(x for x in ev[nxt] if x != cyc[-1])
        if len(used) < len(edges):
            cyc.append(v)
    return cyc


def _directed_edges(c: GluingComplex, ref: FaceRef) -> list[tuple[int, int, int]]:
    ct = c.celltype
    cyc = polygon_cycle(ct, ref.face)
    out = []
    for i, v in enumerate(cyc):
        w = cyc[(i + 1) % len(cyc)]
        e = ct.local_of_full[face_name(set(ct.full[v]) & set(ct.full[w]))]
        out.append((c.orbit(FaceRef(ref.cell, e)), c.orbit(FaceRef(ref.cell, v)), c.orbit(FaceRef(ref.cell, w))))
    return out


@dataclass
class SurfaceReport:
    faces: int
    distinct: bool
    manifold: bool
    boundary_edges: set[int]
    orientable: bool
    signs: dict[FaceRef, int]
    euler_characteristic: int
    boundary_components: int

    @property
    def genus(self) -> int:
        twice = 2 - self.euler_characteristic - self.boundary_components
        return twice // 2 if self.orientable else twice


def surface_report(c: GluingComplex, faces: Iterable[FaceRef]) -> SurfaceReport:
    """Combinatorial check of a union of 2-faces as a surface inside a complex."""
    faces = list(faces)
    roots = [c.orbit(f) for f in faces]
    distinct = len(set(roots)) == len(roots)
    edges: dict[int, list[tuple[int, int, int]]] = defaultdict(list)
    verts = set()
    for i, f in enumerate(faces):
        for e, a, b in _directed_edges(c, f):
            edges[e].append((i, a, b))
            verts |= {a, b}
    manifold = all(len(v) <= 2 for v in edges.values()) and distinct
    bedges = {e for e, v in edges.items() if len(v) == 1}
    sign: dict[int, int] = {}
    ok = True
    adj: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for e, inc in edges.items():
        if len(inc) == 2:
            (i, a, b), (j, c2, d) = inc
            if a == b or c2 == d:
                ok = False
            same = (a, b) == (c2, d)
            adj[i].append((j, -1 if same else 1))
            adj[j].append((i, -1 if same else 1))
    for s in range(len(faces)):
        if s in sign:
            continue
        sign[s] = 1
        stack = [s]
        while stack:
            x = stack.pop()
            for y, rel in adj[x]:
                want = sign[x] * rel
                if y not in sign:
                    sign[y] = want
                    stack.append(y)
                elif sign[y] != want:
                    ok = False
    # boundary circles
    bverts: dict[int, list[int]] = defaultdict(list)
    for e in bedges:
        (_, a, b), = edges[e]
        bverts[a].append(e)
        bverts[b].append(e)
    uf = UnionFind(len(bedges))
    bl = sorted(bedges)
    idx = {e: i for i, e in enumerate(bl)}
    for v, es in bverts.items():
        for e in es[1:]:
            uf.union(idx[es[0]], idx[e])
    ncomp = len({uf.find(i) for i in range(len(bl))})
    chi = len(verts) - len(edges) + len(faces)
    return SurfaceReport(
        len(faces), distinct, manifold, bedges, ok, {f: sign[i] for i, f in enumerate(faces)} if ok else {}, chi, ncomp
    )


def signs_consistent(c: GluingComplex, track: SurfaceTrack) -> bool:
    """The recorded signs orient the surface (up to a global flip per component)."""
    rep = surface_report(c, track.faces)
    if not rep.orientable or not track.signs:
        return False
    for e_edges in _edge_pairs(c, track.faces):
        (f, a, b), (g, c2, d) = e_edges
        same = (a, b) == (c2, d)
        want = -1 if same else 1
        if track.signs[f] * track.signs[g] != want:
            return False
    return True


def _edge_pairs(c: GluingComplex, faces: list[FaceRef]):
    edges: dict[int, list] = defaultdict(list)
    for f in faces:
        for e, a, b in _directed_edges(c, f):
            edges[e].append((f, a, b))
    return [v for v in edges.values() if len(v) == 2]


def _edges_of(c: GluingComplex, faces: Iterable[FaceRef]) -> set[int]:
    ct = c.celltype
    return {c.orbit(FaceRef(f.cell, e)) for f in faces for e in ct.subfaces[f.face] if ct.dim_of[e] == 1}


def mod2_boundary(c: GluingComplex, faces: Iterable[FaceRef]) -> set[int]:
    ct = c.celltype
    out: set[int] = set()
    for f in faces:
        for e in ct.subfaces[f.face]:
            if ct.dim_of[e] == ct.dim_of[f.face] - 1:
                out ^= {c.orbit(FaceRef(f.cell, e))}
    return out


# ---------------------------------------------------------------------------
# gluing tables


@dataclass
class GluingTable:
    name: str
    level: str
    cells: int
    pairings: list[FacetPairing] = field(default_factory=list)
    gammas: dict[str, list[FaceRef]] = field(default_factory=dict)
    surfaces: dict[str, SurfaceTrack] = field(default_factory=dict)
    identifications: int = 0
    duplicates: int = 0
    source: str = ""


def _data_dir() -> Path:
    return Path(str(resources.files("cuspspin") / "data"))


def table_path(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    cand = _data_dir() / (name if name.endswith(".tbl") else f"{name}.tbl")
    if cand.exists():
        return cand
    raise TableError(f"gluing table {name!r} not found")


def _lift(ct_from: CellType, ct_to: CellType, local) -> tuple:
    full = ct_from.full[local]
    base = set(ct_to.base)
    return face_name(l for l in full if l not in base)


def _parse_ref(ct: CellType, text: str) -> FaceRef:
    cell, _, face = text.partition(".")
    if not face:
        raise TableError(f"bad face reference {text!r}")
    try:
        n = int(cell)
    except ValueError as exc:
        raise TableError(f"bad cell index in {text!r}") from exc
    try:
        return FaceRef(n, ct.face(face))
    except ComplexError as exc:
        raise TableError(str(exc)) from exc


def load_table(name: str, _stack: tuple = ()) -> GluingTable:
    path = table_path(name)
    key = str(path.resolve())
    if key in _stack:
        raise TableError(f"table {path.name} includes itself")
    return parse_table(path.read_text(), base_dir=path.parent, source=path.name, _stack=_stack + (key,))


def parse_table(text: str, base_dir: Path | None = None, source: str = "<string>", _stack: tuple = ()) -> GluingTable:
    g = geometry()
    t: GluingTable | None = None
    ct: CellType | None = None
    graft = None
    seen_pairs: dict[FaceRef, FacetPairing] = {}

    def resolve(name: str) -> GluingTable:
        if base_dir is not None and (base_dir / name).exists():
            return load_table(str(base_dir / name), _stack)
        if base_dir is not None and (base_dir / f"{name}.tbl").exists():
            return load_table(str(base_dir / f"{name}.tbl"), _stack)
        return load_table(name, _stack)

    def add_pair(p: FacetPairing, allow_duplicate: bool = False) -> None:
        for ref in (p.a, p.b):
            if not 0 <= ref.cell < t.cells:
                raise TableError(f"{source}: cell {ref.cell} out of range in {p}")
        old = seen_pairs.get(p.a) or seen_pairs.get(p.b)
        if old is not None:
            same = {old.a, old.b} == {p.a, p.b} and old.map == p.map == "identity" or (
                (old.a, old.b, old.map) == (p.a, p.b, p.map)
            )
            if allow_duplicate and same:
                t.duplicates += 1
                return
            raise TableError(f"{source}: facet paired twice ({old} and {p})")
        seen_pairs[p.a] = p
        seen_pairs[p.b] = p
        t.pairings.append(p)

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        where = f"{source}:{lineno}"
        head = tok[0]
        if graft is not None and head != "identify":
            _apply_graft(t, ct, graft, add_pair, source)
            graft = None
        if head == "complex":
            if len(tok) != 6 or tok[2] != "polytope" or tok[4] != "cells":
                raise TableError(f"{where}: expected 'complex <name> polytope <P> cells <n>'")
            if tok[3] not in BASES:
                raise TableError(f"{where}: unknown polytope {tok[3]!r}")
            t = GluingTable(tok[1], tok[3], int(tok[5]), source=source)
            ct = g.celltype(tok[3])
            continue
        if t is None:
            raise TableError(f"{where}: directive before 'complex'")
        if head == "pair":
            if len(tok) != 5 or tok[3] != "map":
                raise TableError(f"{where}: expected 'pair <a> <b> map <m>'")
            a, b = _parse_ref(ct, tok[1]), _parse_ref(ct, tok[2])
            if tok[4] != "identity" and tok[4] not in ct.isometries:
                raise TableError(f"{where}: unknown map {tok[4]!r} for {ct.level}")
            try:
                if ct.map_face(tok[4], a.face) != b.face:
                    raise TableError(f"{where}: map {tok[4]} does not send {format_face(a.face)} to {format_face(b.face)}")
            except KeyError as exc:
                raise TableError(f"{where}: {exc}") from exc
            add_pair(FacetPairing(a, b, tok[4]))
        elif head == "thicken":
            sub = resolve(tok[1])
            sct = g.celltype(sub.level)
            if (sub.level, t.level) == ("P2", "P3"):
                factor = 1
            elif (sub.level, t.level) == ("P3", "P4"):
                factor = 2
            else:
                raise TableError(f"{where}: cannot thicken {sub.level} into {t.level}")
            if sub.cells * factor != t.cells:
                raise TableError(f"{where}: thickening {sub.name} gives {sub.cells * factor} cells, not {t.cells}")
            for p in _thicken_pairs(sub, factor):
                add_pair(p)
            _import_marks(t, sub, sct, ct, lambda c: c * factor, lambda f: f)
        elif head == "include":
            if len(tok) not in (4, 6) or tok[2] != "offset" or (len(tok) == 6 and tok[4] != "marks"):
                raise TableError(f"{where}: expected 'include <table> offset <k> [marks <names>]'")
            sub = resolve(tok[1])
            if sub.level != t.level:
                raise TableError(f"{where}: cannot include a {sub.level} table into {t.level}")
            off = int(tok[3])
            for p in sub.pairings:
                add_pair(FacetPairing(FaceRef(p.a.cell + off, p.a.face), FaceRef(p.b.cell + off, p.b.face), p.map))
            only = set(tok[5].split(",")) if len(tok) == 6 else None
            _import_marks(t, sub, ct, ct, lambda c: c + off, lambda f: f, only)
        elif head == "graft":
            if graft is not None:
                raise TableError(f"{where}: nested graft")
            if len(tok) != 5 or tok[2] != "thicken" or tok[3] != "map":
                raise TableError(f"{where}: expected 'graft <table> thicken map <iso>'")
            sub = resolve(tok[1])
            if sub.level != "P3" or t.level != "P4":
                raise TableError(f"{where}: graft needs a P3 table and a P4 complex")
            if tok[4] not in ct.isometries:
                raise TableError(f"{where}: unknown map {tok[4]!r}")
            graft = {"table": sub, "map": tok[4], "cells": {}}
        elif head == "identify":
            if graft is None:
                raise TableError(f"{where}: 'identify' without a preceding 'graft'")
            src, dst = int(tok[1]), int(tok[2])
            if not 0 <= src < graft["table"].cells * 2 or not 0 <= dst < t.cells:
                raise TableError(f"{where}: cell out of range")
            if src in graft["cells"]:
                raise TableError(f"{where}: graft cell {src} identified twice")
            graft["cells"][src] = dst
            t.identifications += 1
        elif head == "mark":
            _parse_mark(t, ct, tok, where)
        else:
            raise TableError(f"{where}: unknown directive {head!r}")
    if t is None:
        raise TableError(f"{source}: no 'complex' directive")
    if graft is not None:
        _apply_graft(t, ct, graft, add_pair, source)
    return t


def _thicken_pairs(sub: GluingTable, factor: int) -> list[FacetPairing]:
    if factor == 1:
        return list(sub.pairings)
    out = [FacetPairing(FaceRef(2 * c, ("E1",)), FaceRef(2 * c + 1, ("E1",))) for c in range(sub.cells)]
    for p in sub.pairings:
        for s in (0, 1):
            out.append(FacetPairing(FaceRef(2 * p.a.cell + s, p.a.face), FaceRef(2 * p.b.cell + s, p.b.face), p.map))
    return out


def _import_marks(t: GluingTable, sub: GluingTable, sct: CellType, ct: CellType, cellmap, facemap, only=None) -> None:
    def conv(r: FaceRef) -> FaceRef:
        return FaceRef(cellmap(r.cell), facemap(_lift(sct, ct, r.face)))

    for name, edges in sub.gammas.items():
        if only is not None and name not in only:
            continue
        if name in t.gammas:
            raise TableError(f"mark {name} imported twice")
        t.gammas[name] = [conv(e) for e in edges]
    for name, tr in sub.surfaces.items():
        if only is not None and name not in only:
            continue
        if name in t.surfaces:
            raise TableError(f"surface {name} imported twice")
        t.surfaces[name] = SurfaceTrack(name, [conv(f) for f in tr.faces], {conv(f): s for f, s in tr.signs.items()}, tr.boundary)


def _parse_mark(t: GluingTable, ct: CellType, tok: list[str], where: str) -> None:
    if len(tok) < 3:
        raise TableError(f"{where}: incomplete mark")
    kind = tok[1]
    if kind.startswith("gamma"):
        t.gammas[kind] = [_parse_ref(ct, x) for x in tok[2:]]
    elif kind == "surface":
        name = tok[2]
        faces, signs = [], {}
        for x in tok[3:]:
            sgn = None
            if x[-1] in "+-":
                sgn = 1 if x[-1] == "+" else -1
                x = x[:-1]
            r = _parse_ref(ct, x)
            faces.append(r)
            if sgn is not None:
                signs[r] = sgn
        old = t.surfaces.get(name)
        t.surfaces[name] = SurfaceTrack(name, faces, signs, old.boundary if old else ())
    elif kind == "union":
        name, parts = tok[2], tok[3:]
        faces, signs = [], {}
        for p in parts:
            if p not in t.surfaces:
                raise TableError(f"{where}: unknown surface {p!r}")
            faces += t.surfaces[p].faces
        t.surfaces[name] = SurfaceTrack(name, faces, signs, ())
    elif kind == "boundary":
        name = tok[2]
        if name not in t.surfaces:
            raise TableError(f"{where}: unknown surface {name!r}")
        for gname in tok[3:]:
            if gname not in t.gammas:
                raise TableError(f"{where}: unknown curve {gname!r}")
        t.surfaces[name].boundary = tuple(tok[3:])
    else:
        raise TableError(f"{where}: unknown mark kind {kind!r}")


def _apply_graft(t: GluingTable, ct: CellType, graft: dict, add_pair, source: str) -> None:
    sub: GluingTable = graft["table"]
    mapname = graft["map"]
    cells = graft["cells"]
    if len(cells) != 2 * sub.cells:
        raise TableError(f"{source}: graft of {sub.name} needs {2 * sub.cells} identifications, got {len(cells)}")
    if len(set(cells.values())) != len(cells):
        raise TableError(f"{source}: two graft cells identified with the same cell")
    sct = geometry().celltype("P3")
    thick = GluingTable(sub.name, "P4", 2 * sub.cells)
    thick.pairings = _thicken_pairs(sub, 2)
    _import_marks(thick, sub, sct, ct, lambda c: 2 * c, lambda f: f)
    fm = lambda f: ct.map_face(mapname, f)
    for p in thick.pairings:
        if p.map != "identity":
            raise TableError(f"{source}: only identity pairings can be grafted")
        add_pair(FacetPairing(FaceRef(cells[p.a.cell], fm(p.a.face)), FaceRef(cells[p.b.cell], fm(p.b.face))), True)
    conv = lambda r: FaceRef(cells[r.cell], fm(r.face))
    for name, edges in thick.gammas.items():
        t.gammas.setdefault(name, [conv(e) for e in edges])
    for name, tr in thick.surfaces.items():
        if name in t.surfaces:
            continue
        t.surfaces[name] = SurfaceTrack(name, [conv(f) for f in tr.faces], {conv(f): s for f, s in tr.signs.items()}, tr.boundary)


def format_table(t: GluingTable, complex_: GluingComplex | None = None) -> str:
    """Flat rendering of a resolved table: every pairing and mark spelled out."""
    lines = [f"complex {t.name} polytope {t.level} cells {t.cells}"]
    for p in t.pairings:
        lines.append(str(p))
    for name, edges in sorted(t.gammas.items()):
        lines.append(f"mark {name} " + " ".join(str(e) for e in edges))
    for name, tr in sorted(t.surfaces.items()):
        body = " ".join(f"{f}{'+' if tr.signs.get(f, 1) > 0 else '-'}" for f in tr.faces)
        lines.append(f"mark surface {name} {body}")
        if tr.boundary:
            lines.append(f"mark boundary {name} " + " ".join(tr.boundary))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# builds


@dataclass
class Build:
    name: str
    complex: GluingComplex
    table: GluingTable
    theta: ThetaGraph | None = None

    @property
    def surfaces(self) -> dict[str, SurfaceTrack]:
        return self.table.surfaces


def build_from_table(name: str) -> Build:
    t = load_table(name)
    ct = geometry().celltype(t.level)
    c = GluingComplex(ct, t.cells, t.pairings, t.name)
    theta = None
    if all(f"gamma{i}" in t.gammas for i in range(3)):
        theta = ThetaGraph(tuple(t.gammas[f"gamma{i}"] for i in range(3)))
    return Build(t.name, c, t, theta)


def build_sigma(table: str = "sigma") -> Build:
    b = build_from_table(table)
    if b.complex.celltype.level != "P2":
        raise TableError("Sigma must be a P2 complex")
    if b.theta is None or not b.theta.validate(b.complex)["pass"]:
        raise TableError("Sigma table does not carry a valid theta graph")
    return b


def thicken_sigma(sigma: Build) -> Build:
    """One P3 over each pentagon; vertical facets glued as the edges below them."""
    text = f"complex {sigma.name}thick polytope P3 cells {sigma.complex.n_cells}\nthicken {sigma.table.source}\n"
    t = parse_table(text, base_dir=_data_dir(), source="<thicken>")
    ct = geometry().celltype("P3")
    c = GluingComplex(ct, t.cells, t.pairings, "SigmaThick")
    theta = ThetaGraph(tuple(t.gammas[f"gamma{i}"] for i in range(3)))
    return Build("SigmaThick", c, t, theta)


def build_n0(table: str = "n0") -> Build:
    return build_from_table(table)


def build_n1(table: str = "n1") -> Build:
    return build_from_table(table)


def build_n2(table: str = "n2") -> Build:
    return build_from_table(table)


def build_n12(table: str = "n12") -> Build:
    return build_from_table(table)


def build_x(table: str = "x") -> Build:
    return build_from_table(table)


BUILDERS = {
    "sigma": lambda table=None: build_sigma(table or "sigma"),
    "sigmathick": lambda table=None: thicken_sigma(build_sigma(table or "sigma")),
    "n0": lambda table=None: build_n0(table or "n0"),
    "n1": lambda table=None: build_n1(table or "n1"),
    "n2": lambda table=None: build_n2(table or "n2"),
    "n12": lambda table=None: build_n12(table or "n12"),
    "x": lambda table=None: build_x(table or "x"),
}


# ---------------------------------------------------------------------------
# facet census and corner bookkeeping


def top_components(c: GluingComplex) -> list:
    return [comp for comp in c.facet_components if c.classify_component(comp) in ("top", "mixed")]


def top_census(c: GluingComplex) -> dict[int, int]:
    """Number of top facets by side count (3 = triangle, 4 = rectangle, ...)."""
    out: dict[int, int] = defaultdict(int)
    for comp in top_components(c):
        out[c.polygon_shape(comp)["sides"]] += 1
    return dict(sorted(out.items()))


def corner_groups(c: GluingComplex) -> dict[tuple[int, int], list]:
    """Corner strata grouped by the pair of facet components they separate."""
    comp = c.component_of()
    out: dict[tuple[int, int], list] = defaultdict(list)
    for s in c.strata:
        if s.kind == "boundary-chain" and s.length == 1:
            a, b = sorted((comp[s.ends[0]], comp[s.ends[1]]))
            out[a, b].append(s)
    return dict(out)


def absorbed_corners(before: GluingComplex, after: GluingComplex) -> list[tuple[int, int]]:
    """Composite corners of ``before`` all of whose pieces lie on 2π cycles of ``after``.

    ``after`` must have the same cells as ``before`` plus extra pairings.
    """
    kind = {}
    for s in after.strata:
        for r in s.chain:
            kind[r] = (s.kind, s.length)
    out = []
    for key, strata in sorted(corner_groups(before).items()):
        if all(kind[r] == ("interior-cycle", 4) for s in strata for r in s.chain):
            out.append(key)
    return out


def bottom_cells(c: GluingComplex) -> list[int]:
    """Cells whose bottom facet lies on the base surface (one per pentagon)."""
    ct = c.celltype
    bottom = {"P3": ("E2",), "P4": ("E1",)}[ct.level]
    return [cell for cell in range(c.n_cells) if FaceRef(cell, bottom) in ct.index and True]


def sigma_incident_cells_distinct(c: GluingComplex, sigma_faces: list[FaceRef]) -> dict:
    """The cells meeting the base surface along a 2-cell are pairwise distinct.

    Every base pentagon is a face of exactly one cell from each side; the
    check is that these incidences use distinct cells and no cell meets the
    base in two different pentagons or is glued to itself.
    """
    ct = c.celltype
    incidences: list[tuple[int, int]] = []
    for f in sigma_faces:
        root = c.orbit(f)
        for m in c.orbits[root]:
            incidences.append((root, m.cell))
    cells = [cell for _, cell in incidences]
    selfid = c.self_identifications()
    return {
        "pass": len(cells) == len(set(cells)) and not selfid,
        "incident_cells": len(set(cells)),
        "pentagons": len({r for r, _ in incidences}),
    }


def disc_presentations(c: GluingComplex) -> list[dict]:
    """Ways of cutting a P2 complex into a polygon with sides glued in pairs.

    Every subset of the gluings that assembles the pentagons into a disc is
    tried. The disc's corners are boundary vertices where the pentagon
    angles do not add up to a straight line; the remaining gluings identify
    pieces of its boundary.
    """
    ct = c.celltype
    pairs = c.pairings
    n = c.n_cells
    out = []
    for k in range(n - 1, len(pairs) + 1):
        for keep in itertools.combinations(range(len(pairs)), k):
            uf = UnionFind(n)
            for i in keep:
                uf.union(pairs[i].a.cell, pairs[i].b.cell)
            if len({uf.find(i) for i in range(n)}) != 1:
                continue
            disc = GluingComplex(ct, n, [pairs[i] for i in keep])
            if disc.euler_characteristic("include-all") != 1 or disc.self_identifications():
                continue
            chosen = set(keep)
            info = _disc_sides(disc, [pairs[i] for i in range(len(pairs)) if i not in chosen])
            if info is not None:
                info["gluings"] = keep
                out.append(info)
    return out


def _disc_sides(disc: GluingComplex, rest: list[FacetPairing]) -> dict | None:
    ct = disc.celltype
    free = disc.free_facets
    angle: dict[int, int] = defaultdict(int)
    for cell in range(disc.n_cells):
        for v in ct.faces:
            if ct.dim_of[v] == 0:
                angle[disc.orbit(FaceRef(cell, v))] += 1
    ends = {}
    at: dict[int, list[FaceRef]] = defaultdict(list)
    for e in free:
        vs = [disc.orbit(FaceRef(e.cell, v)) for v in ct.subfaces[e.face] if ct.dim_of[v] == 0]
        ends[e] = vs
        for v in vs:
            at[v].append(e)
    if any(len(v) != 2 for v in at.values()):
        return None
    # walk the boundary circle
    start = free[0]
    order = [start]
    prev_v = ends[start][0]
    cur = start
    while True:
        v = ends[cur][1] if ends[cur][0] == prev_v else ends[cur][0]
        nxt = at[v][0] if at[v][1] == cur else at[v][1]
        if nxt == start:
            break
        order.append(nxt)
        prev_v, cur = v, nxt
    if len(order) != len(free):
        return None
    corner_at = lambda a, b: angle[next(iter(set(ends[a]) & set(ends[b])))] != 2
    # rotate so that a side starts at order[0]
    k = len(order)
    shift = next((i for i in range(k) if corner_at(order[i - 1], order[i])), None)
    if shift is None:
        return None
    order = order[shift:] + order[:shift]
    sides: list[list[FaceRef]] = [[order[0]]]
    for i in range(1, k):
        if corner_at(order[i - 1], order[i]):
            sides.append([order[i]])
        else:
            sides[-1].append(order[i])
    convex = all(angle[v] in (1, 2) for v in at)
    partner = {}
    for p in rest:
        partner[p.a] = p.b
        partner[p.b] = p.a
    side_of = {e: i for i, s in enumerate(sides) for e in s}
    glued_sides = set()
    side_pairs = set()
    whole = True
    for i, s in enumerate(sides):
        targets = {side_of.get(partner[e]) for e in s if e in partner}
        if not targets:
            continue
        if len(targets) != 1 or any(e not in partner for e in s):
            whole = False
            continue
        j = targets.pop()
        if len(sides[j]) != len(s):
            whole = False
        glued_sides.add(i)
        side_pairs.add(tuple(sorted((i, j))))
    return {
        "sides": len(sides),
        "convex": convex,
        "glued_sides": len(glued_sides),
        "side_pairs": len(side_pairs),
        "whole_sides": whole,
    }


# ---------------------------------------------------------------------------
# validators


@dataclass
class Check:
    name: str
    anchor: str
    passed: bool
    details: str = ""


def _status(ok: bool) -> str:
    return "pass" if ok else "FAIL"


def sigma_checks(sigma: Build) -> list[Check]:
    from .homology import classify_surface

    c = sigma.complex
    cls = classify_surface(c)
    theta = sigma.theta.validate(c)
    pres = [d for d in disc_presentations(c) if d["sides"] == 12 and d["convex"] and d["whole_sides"]]
    dodeca = [d for d in pres if d["glued_sides"] == 4 and d["side_pairs"] == 2]
    return [
        Check("sigma.cells", "eight right-angled pentagons", c.n_cells == 8, f"cells={c.n_cells}"),
        Check(
            "sigma.holed_torus",
            "holed torus",
            cls.as_tuple() == (True, 1, 1),
            f"orientable={cls.orientable} genus={cls.genus} boundary={cls.boundary_components}",
        ),
        Check("sigma.euler", "regression (computed)", c.euler_characteristic() == -1, f"chi={c.euler_characteristic()}"),
        Check("sigma.corners", "surface with corners", c.validate_corners()["pass"], str(c.validate_corners()["counts"])),
        Check(
            "sigma.dodecagon",
            "dodecagon with two pairs of glued sides",
            bool(dodeca),
            f"{len(dodeca)} dodecagon presentations",
        ),
        Check("sigma.theta", "theta graph", theta["pass"], f"trivalent={theta['trivalent_vertices']} arcs={theta['arcs']}"),
    ]


def thick_checks(thick: Build, sigma: Build) -> list[Check]:
    c = thick.complex
    census = top_census(c)
    vc = c.validate_corners()
    return [
        Check(
            "sigmathick.census",
            "tops: 8 triangles, 4 rectangles, 3 hexagons, all ideal",
            census == {3: 8, 4: 4, 6: 3} and all(c.polygon_shape(x)["ideal"] for x in top_components(c)),
            f"census={census}",
        ),
        Check("sigmathick.corners", "manifold with corners", vc["pass"], str(vc["counts"])),
        Check("sigmathick.embedded", "regression (computed)", c.embedded_facets()["pass"], ""),
        Check(
            "sigmathick.euler",
            "product with an interval",
            c.euler_characteristic("include-all") == sigma.complex.euler_characteristic(),
            f"chi={c.euler_characteristic('include-all')}",
        ),
    ]


def surface_checks(b: Build, name: str, c: GluingComplex | None = None) -> tuple[list[Check], SurfaceReport]:
    c = c or b.complex
    tr = b.surfaces[name]
    rep = surface_report(c, tr.faces)
    declared: set[int] = set()
    for gname in tr.boundary:
        for e in b.table.gammas[gname]:
            declared ^= {c.orbit(e)}
    bnd = mod2_boundary(c, tr.faces)
    sigma_edges = set()
    if "Sigma" in b.surfaces and name != "Sigma":
        sigma_edges = _edges_of(c, b.surfaces["Sigma"].faces)
    free_edges = _edges_of(c, c.free_facets)
    on_sigma = bnd & sigma_edges
    proper = (bnd - sigma_edges) <= free_edges
    checks = [
        Check(f"{b.name}.{name}.surface", "embedded surface", rep.manifold, f"faces={rep.faces}"),
        Check(f"{b.name}.{name}.orientable", "orientable surface", rep.orientable, f"chi={rep.euler_characteristic}"),
        Check(
            f"{b.name}.{name}.boundary",
            "boundary on Sigma is " + "+".join(tr.boundary) if tr.boundary else "closed surface",
            (on_sigma == declared and proper) if tr.boundary else not bnd,
            f"boundary edges={len(bnd)} on Sigma={len(on_sigma)} declared={'+'.join(tr.boundary) or 'none'}",
        ),
    ]
    if tr.signs and len(tr.signs) == len(tr.faces):
        checks.append(Check(f"{b.name}.{name}.signs", "recorded orientation", signs_consistent(c, tr), ""))
    return checks, rep


def n_checks(b: Build, thick: Build, expected_tops: int | None, sigma_faces_name: str = "Sigma") -> list[Check]:
    c = b.complex
    vc = c.validate_corners()
    emb = c.embedded_facets()
    tops = len(top_components(c))
    out = [
        Check(f"{b.name}.corners", "manifold with corners", vc["pass"], str(vc["counts"])),
        Check(f"{b.name}.embedded", "facets embedded", emb["pass"], f"components={emb['components']}"),
        Check(f"{b.name}.orientable", "orientable", c.orientability() is not None, ""),
    ]
    if expected_tops is not None:
        out.append(Check(f"{b.name}.top_facets", f"{expected_tops} top facets", tops == expected_tops, f"top facets={tops}"))
    else:
        out.append(Check(f"{b.name}.top_facets", "regression (computed)", True, f"top facets={tops}"))
    sig = b.surfaces.get(sigma_faces_name)
    if sig is not None:
        d = sigma_incident_cells_distinct(c, sig.faces)
        out.append(
            Check(f"{b.name}.sigma_cells", "cells adjacent to Sigma are distinct", d["pass"], f"cells={d['incident_cells']}")
        )
    return out


def x_checks(x: Build) -> list[Check]:
    c = x.complex
    vc = c.validate_corners()
    emb = c.embedded_facets()
    out = [
        Check("X.corners", "right-angled corners", vc["pass"], str(vc["counts"])),
        Check("X.embedded", "facets embedded", emb["pass"], f"components={emb['components']}"),
        Check("X.orientable", "regression (computed)", c.orientability() is not None, ""),
        Check(
            "X.cells",
            "16 + 32 cells less the identified pairs",
            c.n_cells == 16 + 32 - x.table.identifications and x.table.identifications == 16,
            f"cells={c.n_cells} identified={x.table.identifications}",
        ),
    ]
    checks, rep = surface_checks(x, "S")
    out += checks
    out.append(Check("X.S.genus", "regression (computed)", rep.orientable and rep.genus == GENUS_S, f"genus={rep.genus}"))
    # S meets Sigma exactly in the theta graph
    ct = c.celltype
    closure = lambda faces: {c.orbit(FaceRef(f.cell, g)) for f in faces for g in ct.subfaces[f.face]}
    theta_edges = [e for g in x.table.gammas.values() for e in g]
    meet = closure(x.surfaces["S"].faces) & closure(x.surfaces["Sigma"].faces)
    out.append(Check("X.S_meets_Sigma", "Sigma ∩ S is the theta graph", meet == closure(theta_edges), f"cells={len(meet)}"))
    return out


def pentagon_checks() -> list[Check]:
    g = geometry()
    res = [pentagon_sharing_check(F) for F in compact_pentagons(g.lattice)]
    ok = all(r.involution and r.matrix.is_isometry() for r in res)
    return [
        Check(
            "pentagon.swaps",
            "an isometry exchanges the facets through each pentagon",
            ok and len(res) == 12,
            f"pentagons={len(res)} pointwise={sum(r.fixes_pointwise for r in res)}",
        )
    ]


@dataclass
class Construction:
    sigma: Build
    thick: Build
    n0: Build
    n1: Build
    n2: Build
    n12: Build
    x: Build


def build_all() -> Construction:
    sigma = build_sigma()
    return Construction(sigma, thicken_sigma(sigma), build_n0(), build_n1(), build_n2(), build_n12(), build_x())


def verify_all(k: Construction | None = None) -> list[Check]:
    k = k or build_all()
    checks = sigma_checks(k.sigma) + thick_checks(k.thick, k.sigma)
    checks += n_checks(k.n0, k.thick, 5)
    closed = absorbed_corners(k.thick.complex, k.n0.complex)
    checks.append(Check("N0.closed_corners", "four composite corners closed into 2π cycles", len(closed) == 4, f"corners={closed}"))
    checks += surface_checks(k.n0, "S0")[0]
    for b, s in ((k.n1, "S1"), (k.n2, "S2")):
        checks += n_checks(b, k.thick, None)
        checks += surface_checks(b, s)[0]
    checks += n_checks(k.n12, k.thick, 15)
    checks += surface_checks(k.n12, "S12")[0]
    checks += x_checks(k.x)
    checks += pentagon_checks()
    return checks
