"""Complexes of glued polytope copies and manifold-with-corners checks.

A :class:`GluingComplex` is a number of copies of one polytope type
(P2, P3 or P4, all realised inside the face lattice of P4) plus facet
pairings. Faces of a copy are named locally by the labels of the P4
facets containing them, minus the labels that cut out the polytope type
itself: the edge ``E1 ∩ E2 ∩ H4`` of P2 is called ``H4``.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .polytope import FaceLattice, FaceName, face_name, label_key

BASES: dict[str, FaceName] = {"P4": (), "P3": ("E1",), "P2": ("E1", "E2")}
BOTTOMS: dict[str, FaceName] = {"P3": ("E2",), "P4": ("E1",)}


class ComplexError(ValueError):
    pass


def format_face(local: FaceName) -> str:
    return ",".join(local) if local else "cell"


def parse_face(text: str) -> FaceName:
    if text == "cell":
        return ()
    return face_name(text.split(","))


@dataclass(frozen=True)
class NamedIsometry:
    name: str
    perm: Mapping[str, str]
    det: int

    def apply(self, labels: Iterable[str]) -> FaceName:
        return face_name(self.perm[l] for l in labels)


class CellType:
    """One polytope type P2, P3 or P4 as a face of P4."""

    def __init__(self, lattice: FaceLattice, level: str, isometries: Sequence[NamedIsometry] = ()):
        if level not in BASES:
            raise ComplexError(f"unknown polytope type {level!r}")
        self.lattice = lattice
        self.level = level
        self.base = BASES[level]
        base_face = lattice.by_name[self.base]
        self.dim = base_face.dim
        base_set = set(self.base)
        members = [f for f in lattice.faces if f.vertices <= base_face.vertices and f.dim <= self.dim]
        members.sort(key=lambda f: (f.dim, [label_key(l) for l in f.facets]))
        self.faces: list[FaceName] = []
        self.full: dict[FaceName, FaceName] = {}
        self._face_obj = {}
        for f in members:
            local = face_name(l for l in f.facets if l not in base_set)
            self.faces.append(local)
            self.full[local] = f.facets
            self._face_obj[local] = f
        self.index = {name: i for i, name in enumerate(self.faces)}
        self.local_of_full = {v: k for k, v in self.full.items()}
        self.dim_of = {name: self._face_obj[name].dim for name in self.faces}
        self.ideal = {
            name for name in self.faces if self.dim_of[name] == 0 and not self._face_obj[name].compact
        }
        self.compact = {name for name in self.faces if self._face_obj[name].compact}
        self.facets = [n for n in self.faces if self.dim_of[n] == self.dim - 1]
        self.subfaces: dict[FaceName, list[FaceName]] = {}
        for name in self.faces:
            vs = self._face_obj[name].vertices
            d = self.dim_of[name]
            self.subfaces[name] = [
                g for g in self.faces if self._face_obj[g].vertices <= vs and self.dim_of[g] <= d
            ]
        self.facets_at: dict[FaceName, list[FaceName]] = {}
        for name in self.faces:
            vs = self._face_obj[name].vertices
            self.facets_at[name] = [
                F for F in self.facets if vs <= self._face_obj[F].vertices
            ]
        self.isometries: dict[str, NamedIsometry] = {}
        for iso in isometries:
            if iso.apply(self.base) == self.base:
                self.isometries[iso.name] = iso

    def __repr__(self) -> str:
        return f"CellType({self.level})"

    def face(self, text_or_name) -> FaceName:
        name = parse_face(text_or_name) if isinstance(text_or_name, str) else face_name(text_or_name)
        if name not in self.index:
            raise ComplexError(f"{format_face(name)} is not a face of {self.level}")
        return name

    def map_face(self, mapname: str, local: FaceName) -> FaceName:
        if mapname == "identity":
            return local
        iso = self.isometries[mapname]
        return self.local_of_full[iso.apply(self.full[local])]

    def orientation_character(self, mapname: str) -> int:
        """Determinant of the map restricted to this polytope's span."""
        if mapname == "identity":
            return 1
        iso = self.isometries[mapname]
        # the base facets are permuted among themselves; a transposition flips the normal plane
        base = list(self.base)
        perm = [base.index(iso.perm[l]) for l in base]
        sgn = 1
        for i, j in itertools.combinations(range(len(perm)), 2):
            if perm[i] > perm[j]:
                sgn = -sgn
        return iso.det * sgn

    @cached_property
    def codim2(self) -> list[FaceName]:
        return [n for n in self.faces if self.dim_of[n] == self.dim - 2]

    @cached_property
    def classification(self) -> dict[FaceName, str]:
        """bottom / vertical / top for each facet, relative to the standard bottom."""
        out = {}
        if self.level not in BOTTOMS:
            return {F: "facet" for F in self.facets}
        bottom = BOTTOMS[self.level]
        bottom_vs = self._face_obj[bottom].vertices
        for F in self.facets:
            if F == bottom:
                out[F] = "bottom"
                continue
            common = self._face_obj[F].vertices & bottom_vs
            meet = self.lattice.by_vertices.get(common)
            out[F] = "vertical" if meet is not None and meet.dim == self.dim - 2 else "top"
        return out


@dataclass(frozen=True, order=True)
class FaceRef:
    cell: int
    face: FaceName

    def __str__(self) -> str:
        return f"{self.cell}.{format_face(self.face)}"


@dataclass(frozen=True)
class FacetPairing:
    a: FaceRef
    b: FaceRef
    map: str = "identity"

    def __str__(self) -> str:
        return f"pair {self.a} {self.b} map {self.map}"


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return
        # smaller index is the canonical representative
        if rx < ry:
            self.parent[ry] = rx
        else:
            self.parent[rx] = ry


@dataclass
class Stratum:
    kind: str  # interior-cycle | boundary-chain
    chain: list[FaceRef]
    ends: tuple = ()  # free facets at the two ends of a boundary chain

    @property
    def length(self) -> int:
        return len(self.chain)

    @property
    def rep(self) -> FaceRef:
        return min(self.chain)


@dataclass
class FacetComponent:
    id: int
    facets: list[FaceRef]

    @property
    def labels(self) -> frozenset:
        return frozenset(f.face for f in self.facets)


class GluingComplex:
    """Copies of one polytope type with facets paired by isometries."""

    def __init__(self, celltype: CellType, n_cells: int, pairings: Iterable[FacetPairing] = (), name: str = ""):
        self.celltype = celltype
        self.n_cells = n_cells
        self.name = name
        self.pairings: list[FacetPairing] = []
        self.partner: dict[FaceRef, tuple[FaceRef, str]] = {}
        for p in pairings:
            self._add(p)

    def _add(self, p: FacetPairing) -> None:
        ct = self.celltype
        for ref in (p.a, p.b):
            if not 0 <= ref.cell < self.n_cells:
                raise ComplexError(f"cell {ref.cell} out of range in {p}")
            if ref.face not in ct.index or ct.dim_of[ref.face] != ct.dim - 1:
                raise ComplexError(f"{format_face(ref.face)} is not a facet of {ct.level}")
            if ref in self.partner:
                raise ComplexError(f"facet {ref} is already paired")
        if p.a == p.b:
            raise ComplexError(f"facet {p.a} paired with itself")
        if p.map != "identity" and p.map not in ct.isometries:
            raise ComplexError(f"{p.map!r} is not an isometry of {ct.level}")
        if ct.map_face(p.map, p.a.face) != p.b.face:
            raise ComplexError(f"map {p.map} does not send {format_face(p.a.face)} to {format_face(p.b.face)}")
        self.pairings.append(p)
        self.partner[p.a] = (p.b, p.map)
        self.partner[p.b] = (p.a, p.map)

    def copy(self) -> GluingComplex:
        return GluingComplex(self.celltype, self.n_cells, self.pairings, self.name)

    def with_pairings(self, extra: Iterable[FacetPairing], name: str | None = None, n_cells: int | None = None) -> GluingComplex:
        return GluingComplex(
            self.celltype, self.n_cells if n_cells is None else n_cells, list(self.pairings) + list(extra), name or self.name
        )

    # ---- face identification -------------------------------------------------

    def _gid(self, cell: int, face: FaceName) -> int:
        return cell * len(self.celltype.faces) + self.celltype.index[face]

    def _ref(self, gid: int) -> FaceRef:
        n = len(self.celltype.faces)
        return FaceRef(gid // n, self.celltype.faces[gid % n])

    def map_through(self, ref: FaceRef, facet: FaceName) -> FaceRef | None:
        """Image of a face of ``ref.cell`` lying in ``facet`` across that facet's pairing."""
        src = FaceRef(ref.cell, facet)
        if src not in self.partner:
            return None
        dst, mapname = self.partner[src]
        ct = self.celltype
        if self.pairings_index[src]:
            return FaceRef(dst.cell, ct.map_face(mapname, ref.face))
        return FaceRef(dst.cell, self._inverse_map(mapname, ref.face))

    def _inverse_map(self, mapname: str, local: FaceName) -> FaceName:
        if mapname == "identity":
            return local
        ct = self.celltype
        iso = ct.isometries[mapname]
        inv = {v: k for k, v in iso.perm.items()}
        return ct.local_of_full[face_name(inv[l] for l in ct.full[local])]

    @cached_property
    def pairings_index(self) -> dict[FaceRef, bool]:
        """True when the facet is the source side of its pairing."""
        out = {}
        for p in self.pairings:
            out[p.a] = True
            out[p.b] = False
        return out

    @cached_property
    def orbit_of(self) -> list[int]:
        ct = self.celltype
        uf = UnionFind(self.n_cells * len(ct.faces))
        for p in sorted(self.pairings, key=lambda q: (q.a, q.b)):
            for f in ct.subfaces[p.a.face]:
                g = ct.map_face(p.map, f)
                uf.union(self._gid(p.a.cell, f), self._gid(p.b.cell, g))
        return [uf.find(i) for i in range(self.n_cells * len(ct.faces))]

    @cached_property
    def orbits(self) -> dict[int, list[FaceRef]]:
        out: dict[int, list[FaceRef]] = defaultdict(list)
        for gid, root in enumerate(self.orbit_of):
            out[root].append(self._ref(gid))
        return dict(out)

    def orbit(self, ref: FaceRef) -> int:
        return self.orbit_of[self._gid(ref.cell, ref.face)]

    def orbit_dim(self, root: int) -> int:
        return self.celltype.dim_of[self._ref(root).face]

    def orbit_is_ideal(self, root: int) -> bool:
        return self._ref(root).face in self.celltype.ideal

    def self_identifications(self) -> list[tuple[FaceRef, FaceRef]]:
        """Distinct faces of one cell that end up identified (non-regular gluing)."""
        bad = []
        for root, members in self.orbits.items():
            seen: dict[int, FaceRef] = {}
            for m in members:
                if m.cell in seen and seen[m.cell] != m:
                    bad.append((seen[m.cell], m))
                seen.setdefault(m.cell, m)
        return bad

    @cached_property
    def free_facets(self) -> list[FaceRef]:
        return [
            FaceRef(c, F)
            for c in range(self.n_cells)
            for F in self.celltype.facets
            if FaceRef(c, F) not in self.partner
        ]

    # ---- strata ---------------------------------------------------------------

    def _walk(self, start: FaceRef, via: FaceName) -> tuple[list[FaceRef], FaceRef | None, bool]:
        """Walk around a codim-2 face leaving through ``via``.

        Returns the visited corners (excluding start), the free facet where the
        walk stopped (or None) and whether it came back to ``start``.
        """
        ct = self.celltype
        visited: list[FaceRef] = []
        cur, out = start, via
        limit = 4 * self.n_cells * len(ct.facets) + 8
        for _ in range(limit):
            src = FaceRef(cur.cell, out)
            if src not in self.partner:
                return visited, src, False
            dst, _ = self.partner[src]
            nxt = self.map_through(cur, out)
            if nxt == start:
                return visited, None, True
            visited.append(nxt)
            others = [F for F in ct.facets_at[nxt.face] if F != dst.face]
            if len(others) != 1:
                raise ComplexError(f"codim-2 face {nxt} is not in exactly two facets")
            cur, out = nxt, others[0]
        raise ComplexError("stratum walk did not terminate")

    @cached_property
    def strata(self) -> list[Stratum]:
        ct = self.celltype
        done: set[FaceRef] = set()
        out: list[Stratum] = []
        for c in range(self.n_cells):
            for f in ct.codim2:
                start = FaceRef(c, f)
                if start in done:
                    continue
                F1, F2 = ct.facets_at[f]
                fwd, end2, closed = self._walk(start, F2)
                if closed:
                    chain = [start] + fwd
                    st = Stratum("interior-cycle", chain)
                else:
                    back, end1, closed_b = self._walk(start, F1)
                    chain = list(reversed(back)) + [start] + fwd
                    st = Stratum("boundary-chain", chain, (end1, end2))
                done.update(st.chain)
                out.append(st)
        out.sort(key=lambda s: s.rep)
        return out

    def validate_corners(self) -> dict:
        failures = []
        counts: dict[str, int] = defaultdict(int)
        for s in self.strata:
            counts[f"{s.kind}({s.length})"] += 1
            ok = (s.kind == "interior-cycle" and s.length == 4) or (
                s.kind == "boundary-chain" and s.length in (1, 2)
            )
            if not ok:
                failures.append(s)
        selfid = self.self_identifications()
        return {
            "pass": not failures and not selfid,
            "failures": failures,
            "self_identified": selfid,
            "counts": dict(sorted(counts.items())),
        }

    # ---- facets -----------------------------------------------------------------

    @cached_property
    def facet_components(self) -> list[FacetComponent]:
        free = self.free_facets
        idx = {f: i for i, f in enumerate(free)}
        uf = UnionFind(len(free))
        for s in self.strata:
            if s.kind == "boundary-chain" and s.length == 2:
                a, b = s.ends
                uf.union(idx[a], idx[b])
        groups: dict[int, list[FaceRef]] = defaultdict(list)
        for f in free:
            groups[uf.find(idx[f])].append(f)
        comps = sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])
        return [FacetComponent(i, g) for i, g in enumerate(comps)]

    def component_of(self) -> dict[FaceRef, int]:
        return {f: comp.id for comp in self.facet_components for f in comp.facets}

    def embedded_facets(self) -> dict:
        comp = self.component_of()
        bad = []
        for s in self.strata:
            if s.kind == "boundary-chain" and s.length == 1:
                a, b = s.ends
                if comp[a] == comp[b]:
                    bad.append(s)
        return {"pass": not bad, "failures": bad, "components": len(self.facet_components)}

    def classify_component(self, comp: FacetComponent) -> str:
        kinds = {self.celltype.classification.get(f.face, "facet") for f in comp.facets}
        return kinds.pop() if len(kinds) == 1 else "mixed"

    def polygon_shape(self, comp: FacetComponent) -> dict:
        """Corner count of a 2-dimensional facet component (P3 complexes).

        A vertex of the composite polygon is an ideal vertex orbit, or a finite
        vertex orbit where the pieces of the component make a right angle.
        """
        ct = self.celltype
        if ct.dim != 3:
            raise ComplexError("polygon shapes are defined for 3-dimensional complexes")
        members = set(comp.facets)
        angle: dict[int, int] = defaultdict(int)
        ideal_orbits = set()
        for f in comp.facets:
            for v in ct.subfaces[f.face]:
                if ct.dim_of[v] != 0:
                    continue
                root = self.orbit(FaceRef(f.cell, v))
                if v in ct.ideal:
                    ideal_orbits.add(root)
                else:
                    angle[root] += 1
        right = [r for r, k in angle.items() if k == 1]
        return {
            "pieces": len(members),
            "sides": len(ideal_orbits) + len(right),
            "ideal_vertices": len(ideal_orbits),
            "ideal": not right,
        }

    # ---- orientation and Euler characteristic -----------------------------------

    def orientability(self) -> dict[int, int] | None:
        """A sign per cell making every pairing orientation-reversing, or None."""
        ct = self.celltype
        adj: dict[int, list[tuple[int, int]]] = defaultdict(list)
        for p in self.pairings:
            rel = -ct.orientation_character(p.map)
            adj[p.a.cell].append((p.b.cell, rel))
            adj[p.b.cell].append((p.a.cell, rel))
        signs: dict[int, int] = {}
        for start in range(self.n_cells):
            if start in signs:
                continue
            signs[start] = 1
            stack = [start]
            while stack:
                c = stack.pop()
                for d, rel in adj[c]:
                    want = signs[c] * rel
                    if d not in signs:
                        signs[d] = want
                        stack.append(d)
                    elif signs[d] != want:
                        return None
        return signs

    def is_connected(self) -> bool:
        uf = UnionFind(self.n_cells)
        for p in self.pairings:
            uf.union(p.a.cell, p.b.cell)
        return len({uf.find(c) for c in range(self.n_cells)}) <= 1

    def orbit_counts(self, ideal_policy: str = "exclude-ideal") -> list[int]:
        counts = [0] * (self.celltype.dim + 1)
        for root in self.orbits:
            if ideal_policy == "exclude-ideal" and self.orbit_is_ideal(root):
                continue
            counts[self.orbit_dim(root)] += 1
        return counts

    def euler_characteristic(self, ideal_policy: str = "exclude-ideal") -> int:
        if ideal_policy not in ("exclude-ideal", "include-all"):
            raise ComplexError(f"unknown ideal policy {ideal_policy!r}")
        return sum((-1) ** k * n for k, n in enumerate(self.orbit_counts(ideal_policy)))

    def component_euler_characteristic(self, comp: FacetComponent, ideal_policy: str = "exclude-ideal") -> int:
        """Euler characteristic of a facet component as a subcomplex."""
        ct = self.celltype
        roots = set()
        for f in comp.facets:
            for g in ct.subfaces[f.face]:
                r = self.orbit(FaceRef(f.cell, g))
                if ideal_policy == "exclude-ideal" and g in ct.ideal:
                    continue
                roots.add((r, ct.dim_of[g]))
        return sum((-1) ** d for _, d in roots)

    def summary(self) -> dict:
        vc = self.validate_corners()
        emb = self.embedded_facets()
        return {
            "name": self.name,
            "polytope": self.celltype.level,
            "cells": self.n_cells,
            "pairings": len(self.pairings),
            "free_facets": len(self.free_facets),
            "corners_valid": vc["pass"],
            "strata": vc["counts"],
            "embedded_facets": emb["pass"],
            "facet_components": emb["components"],
            "orientable": self.orientability() is not None,
            "euler_characteristic": self.euler_characteristic(),
        }


def build_complex(celltype: CellType, n_cells: int, pairings: Iterable[FacetPairing], name: str = "") -> GluingComplex:
    return GluingComplex(celltype, n_cells, pairings, name)


def codim2_strata(c: GluingComplex) -> list[Stratum]:
    return c.strata


def validate_corners(c: GluingComplex) -> dict:
    return c.validate_corners()


def facet_components(c: GluingComplex) -> list[FacetComponent]:
    return c.facet_components


def embedded_facets(c: GluingComplex) -> dict:
    return c.embedded_facets()


def orientability(c: GluingComplex):
    signs = c.orientability()
    return "non-orientable" if signs is None else signs


def euler_characteristic(c: GluingComplex, ideal_policy: str = "exclude-ideal") -> int:
    return c.euler_characteristic(ideal_policy)


def double(c: GluingComplex, y: FacetComponent | Iterable[FaceRef]) -> GluingComplex:
    """Two copies of ``c`` glued by the identity along the free facets ``y``."""
    facets = y.facets if isinstance(y, FacetComponent) else list(y)
    free = set(c.free_facets)
    for f in facets:
        if f not in free:
            raise ComplexError(f"{f} is not a free facet of {c.name or 'the complex'}")
    n = c.n_cells
    pairs = list(c.pairings)
    pairs += [
        FacetPairing(FaceRef(p.a.cell + n, p.a.face), FaceRef(p.b.cell + n, p.b.face), p.map) for p in c.pairings
    ]
    pairs += [FacetPairing(f, FaceRef(f.cell + n, f.face)) for f in sorted(facets)]
    return GluingComplex(c.celltype, 2 * n, pairs, f"D({c.name})")


@dataclass
class DoublingStep:
    k: int
    cells: int
    euler: int
    euler_expected: int | None
    free_facets: int
    corners_valid: bool | None = None
    embedded: bool | None = None


@dataclass
class DoublingReport:
    m: int
    projected_cells: int
    steps: list[DoublingStep] = field(default_factory=list)
    partial: bool = False
    final: GluingComplex | None = None


def doubling_schedule(
    c: GluingComplex,
    k: int,
    memory_guard: int = 1_000_000,
    validate: bool = False,
    ideal_policy: str = "exclude-ideal",
) -> DoublingReport:
    """Double successively along the copies of each original facet component."""
    comps = c.facet_components
    m = len(comps)
    if k > m:
        raise ComplexError(f"only {m} facet components to double along")
    origin = {f: comp.id for comp in comps for f in comp.facets}
    n0 = c.n_cells
    report = DoublingReport(m=m, projected_cells=n0 * 2**m)
    cur = c
    report.steps.append(
        DoublingStep(0, cur.n_cells, cur.euler_characteristic(ideal_policy), None, len(cur.free_facets))
    )
    for j in range(k):
        if cur.n_cells * 2 > memory_guard:
            report.partial = True
            break
        ys = [f for f in cur.free_facets if origin[FaceRef(f.cell % n0, f.face)] == j]
        chi_y = _subcomplex_euler(cur, ys, ideal_policy)
        expected = 2 * cur.euler_characteristic(ideal_policy) - chi_y
        cur = double(cur, ys)
        step = DoublingStep(j + 1, cur.n_cells, cur.euler_characteristic(ideal_policy), expected, len(cur.free_facets))
        if validate:
            step.corners_valid = cur.validate_corners()["pass"]
            step.embedded = cur.embedded_facets()["pass"]
        report.steps.append(step)
    report.final = cur
    return report


def _subcomplex_euler(c: GluingComplex, facets: Sequence[FaceRef], ideal_policy: str) -> int:
    ct = c.celltype
    roots = set()
    for f in facets:
        for g in ct.subfaces[f.face]:
            if ideal_policy == "exclude-ideal" and g in ct.ideal:
                continue
            roots.add((c.orbit(FaceRef(f.cell, g)), ct.dim_of[g]))
    return sum((-1) ** d for _, d in roots)
