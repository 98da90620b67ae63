"""Mod 2 topology of glued polytope complexes.

Pipeline: cusp truncation turns a :class:`~cuspspin.corners.GluingComplex`
into a compact regular CW complex, barycentric subdivision turns that into
an ordered simplicial complex, and everything else (Betti numbers, cup and
cap products, Poincare-Lefschetz duals, the self-intersection number of a
surface) is sparse linear algebra over Z/2.

Chains and cochains are sets of simplex tuples; a simplex is the increasing
tuple of its vertex ranks.
"""

from __future__ import annotations

import hashlib
import itertools
import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

from .corners import ComplexError, FaceRef, GluingComplex, UnionFind

Simplex = tuple[int, ...]


class HomologyError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# linear algebra over Z/2


class Reducer:
    """Incremental column reduction over Z/2 with distinct pivot rows.

    Columns are sets of row indices; the pivot of a column is its largest
    row. With ``track=True`` every stored column remembers which input
    columns it is the sum of, which yields kernels and solutions.
    """

    def __init__(self, track: bool = False):
        self.pivots: dict[int, set[int]] = {}
        self.track = track
        self.combo: dict[int, set[int]] = {}
        self.kernel: list[set[int]] = []
        self._count = 0

    def add(self, column: Iterable[int]) -> bool:
        """Insert a column; True when it was independent of the previous ones."""
        col = set(column)
        combo = {self._count} if self.track else None
        self._count += 1
        while col:
            low = max(col)
            other = self.pivots.get(low)
            if other is None:
                self.pivots[low] = col
                if self.track:
                    self.combo[low] = combo
                return True
            col ^= other
            if self.track:
                combo ^= self.combo[low]
        if self.track:
            self.kernel.append(combo)
        return False

    def reduce(self, column: Iterable[int]) -> tuple[set[int], set[int]]:
        """Residue of a column modulo the span, and the stored combination used."""
        col = set(column)
        used: set[int] = set()
        while col:
            low = max(col)
            other = self.pivots.get(low)
            if other is None:
                break
            col ^= other
            if self.track:
                used ^= self.combo[low]
        return col, used

    def in_span(self, column: Iterable[int]) -> bool:
        col = set(column)
        while col:
            other = self.pivots.get(max(col))
            if other is None:
                return False
            col ^= other
        return True

    @property
    def rank(self) -> int:
        return len(self.pivots)


def rank_z2(columns: Iterable[Iterable[int]]) -> int:
    red = Reducer()
    for c in columns:
        red.add(c)
    return red.rank


def dual_functional(columns: Sequence[set[int]], targets: Sequence[int]) -> set[int]:
    """A row vector ``a`` with ``|a ∩ columns[i]|`` of parity ``targets[i]``.

    The columns must have pairwise distinct pivots (largest rows); they are
    processed by increasing pivot, toggling the pivot row when needed, which
    never disturbs a column already processed.
    """
    order = sorted(range(len(columns)), key=lambda i: max(columns[i]))
    lows = [max(columns[i]) for i in order]
    if len(set(lows)) != len(lows):
        raise HomologyError("columns do not have distinct pivots")
    a: set[int] = set()
    for i in order:
        if len(a & columns[i]) % 2 != targets[i] % 2:
            a ^= {max(columns[i])}
    return a


# ---------------------------------------------------------------------------
# regular CW complexes


@dataclass
class RegularCW:
    """Cells graded by dimension with their codimension-one faces.

    Cell ids are ordered by ``(dim, key)`` so that ids are already a valid
    vertex order for the barycentric subdivision.
    """

    dims: list[int]
    facets: list[tuple[int, ...]]
    boundary: list[bool]
    keys: list[Hashable] = field(default_factory=list)

    @property
    def n_cells(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return max(self.dims) if self.dims else -1

    def cells(self, k: int) -> list[int]:
        return [i for i, d in enumerate(self.dims) if d == k]

    def cofacets(self) -> list[list[int]]:
        up: list[list[int]] = [[] for _ in self.dims]
        for i, fs in enumerate(self.facets):
            for f in fs:
                up[f].append(i)
        return up

    def below(self, i: int) -> set[int]:
        """All proper faces of a cell."""
        out: set[int] = set()
        stack = list(self.facets[i])
        while stack:
            f = stack.pop()
            if f not in out:
                out.add(f)
                stack.extend(self.facets[f])
        return out

    def check(self) -> None:
        """Boundary of boundary vanishes mod 2 and every positive-dim cell has faces."""
        for i, fs in enumerate(self.facets):
            if self.dims[i] > 0 and not fs:
                raise HomologyError(f"cell {self.keys[i] if self.keys else i} has no faces")
            for f in fs:
                if self.dims[f] != self.dims[i] - 1:
                    raise HomologyError("facet of wrong dimension")
            if self.dims[i] >= 2:
                count: dict[int, int] = defaultdict(int)
                for f in fs:
                    for g in self.facets[f]:
                        count[g] += 1
                if any(v % 2 for v in count.values()):
                    raise HomologyError(f"boundary of boundary is not zero at cell {i}")
            if self.dims[i] == 1 and len(fs) != 2:
                raise HomologyError(f"edge {i} does not have two endpoints")

    def counts(self) -> list[int]:
        out = [0] * (self.dim + 1)
        for d in self.dims:
            out[d] += 1
        return out

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * n for k, n in enumerate(self.counts()))

    def chain_complex(self, relative: bool = False) -> Z2ChainComplex:
        """Cellular chains; mod 2 every incidence number of a regular complex is 1."""
        keep = [not (relative and b) for b in self.boundary]
        basis: list[list[int]] = [[] for _ in range(self.dim + 1)]
        for i, d in enumerate(self.dims):
            if keep[i]:
                basis[d].append(i)
        pos = {c: j for b in basis for j, c in enumerate(b)}
        bnd = [[]]
        for k in range(1, self.dim + 1):
            bnd.append([{pos[f] for f in self.facets[c] if keep[f]} for c in basis[k]])
        return Z2ChainComplex([len(b) for b in basis], bnd)


def regular_cw_from_faces(dims: Sequence[int], facets: Sequence[Iterable[Hashable]], keys: Sequence[Hashable],
                          boundary: Sequence[bool] | None = None) -> RegularCW:
    """Build a RegularCW from keyed cells, renumbering by (dim, key order)."""
    order = sorted(range(len(keys)), key=lambda i: (dims[i], i))
    new = {keys[i]: j for j, i in enumerate(order)}
    return RegularCW(
        dims=[dims[i] for i in order],
        facets=[tuple(sorted(new[f] for f in facets[i])) for i in order],
        boundary=[bool(boundary[i]) if boundary is not None else False for i in order],
        keys=[keys[i] for i in order],
    )


@dataclass
class TruncatedComplex:
    cw: RegularCW
    cell_of: dict[tuple[int, tuple], int]  # (cell, local item) -> cw id
    source: GluingComplex

    def face(self, ref: FaceRef) -> int:
        return self.cell_of[(ref.cell, ("f", ref.face))]


def truncate_ideal(c: GluingComplex) -> TruncatedComplex:
    """Compact core of a cusped complex: every ideal vertex becomes its link.

    In each polytope copy, an ideal vertex ``v`` of a face ``F`` of dimension
    at least one is replaced by the cell ``F ∩ (horosphere at v)`` of one
    dimension less. Link cells and every face lying in a free facet are
    marked as boundary.
    """
    ct = c.celltype
    items: list[tuple] = []
    for f in ct.faces:
        if f in ct.ideal:
            continue
        items.append(("f", f))
    for f in ct.faces:
        if ct.dim_of[f] >= 1:
            for v in ct.subfaces[f]:
                if v in ct.ideal:
                    items.append(("L", f, v))
    local_index = {it: i for i, it in enumerate(items)}

    def item_dim(it) -> int:
        return ct.dim_of[it[1]] - (1 if it[0] == "L" else 0)

    local_facets: dict[tuple, list[tuple]] = {}
    for it in items:
        d = ct.dim_of[it[1]]
        subs = [g for g in ct.subfaces[it[1]] if ct.dim_of[g] == d - 1]
        if it[0] == "f":
            out = [("f", g) for g in subs if g not in ct.ideal]
            out += [("L", it[1], v) for v in ct.subfaces[it[1]] if v in ct.ideal and d >= 1]
        else:
            v = it[2]
            out = [("L", g, v) for g in subs if ct.dim_of[g] >= 1 and v in ct.subfaces[g]]
        local_facets[it] = out

    n = len(items)
    uf = UnionFind(c.n_cells * n)
    for p in sorted(c.pairings, key=lambda q: (q.a, q.b)):
        for g in ct.subfaces[p.a.face]:
            h = ct.map_face(p.map, g)
            if g not in ct.ideal:
                uf.union(p.a.cell * n + local_index[("f", g)], p.b.cell * n + local_index[("f", h)])
            if ct.dim_of[g] >= 1:
                for v in ct.subfaces[g]:
                    if v in ct.ideal:
                        w = ct.map_face(p.map, v)
                        uf.union(p.a.cell * n + local_index[("L", g, v)], p.b.cell * n + local_index[("L", h, w)])

    in_free: set[tuple[int, tuple]] = set()
    for F in c.free_facets:
        for g in ct.subfaces[F.face]:
            if g not in ct.ideal:
                in_free.add((F.cell, ("f", g)))

    roots: dict[int, int] = {}
    dims: list[int] = []
    keys: list = []
    bflag: list[bool] = []
    for cell in range(c.n_cells):
        for it in items:
            r = uf.find(cell * n + local_index[it])
            if r not in roots:
                roots[r] = len(dims)
                dims.append(item_dim(it))
                keys.append((cell, it))
                bflag.append(it[0] == "L")
            if (cell, it) in in_free:
                bflag[roots[r]] = True
    facets: list[set] = [set() for _ in dims]
    for cell in range(c.n_cells):
        for it in items:
            k = roots[uf.find(cell * n + local_index[it])]
            facets[k].update(roots[uf.find(cell * n + local_index[g])] for g in local_facets[it])
    tmp_keys = list(range(len(dims)))
    cw0 = regular_cw_from_faces(dims, facets, tmp_keys, bflag)
    # regular_cw_from_faces keeps keys as old ids; translate back
    old_to_new = {old: new for new, old in enumerate(cw0.keys)}
    cw = RegularCW(cw0.dims, cw0.facets, cw0.boundary, [keys[o] for o in cw0.keys])
    cell_of = {}
    for cell in range(c.n_cells):
        for it in items:
            cell_of[(cell, it)] = old_to_new[roots[uf.find(cell * n + local_index[it])]]
    return TruncatedComplex(cw, cell_of, c)


def cw_from_surface_complex(c: GluingComplex) -> RegularCW:
    return truncate_ideal(c).cw


# ---------------------------------------------------------------------------
# ordered simplicial complexes


class OrderedSimplicialComplex:
    """Simplices as increasing vertex tuples; closed under faces."""

    def __init__(self, simplices: Iterable[Sequence[int]], boundary: Iterable[Sequence[int]] = (),
                 vertex_labels: Sequence[Hashable] | None = None):
        closure: set[Simplex] = set()
        for s in simplices:
            s = tuple(sorted(s))
            if len(set(s)) != len(s):
                raise HomologyError(f"degenerate simplex {s}")
            if s in closure:
                continue
            for r in range(1, len(s) + 1):
                closure.update(itertools.combinations(s, r))
        self.dim = max((len(s) for s in closure), default=0) - 1
        self.simplices: list[list[Simplex]] = [[] for _ in range(self.dim + 1)]
        for s in sorted(closure):
            self.simplices[len(s) - 1].append(s)
        self.index = [{s: i for i, s in enumerate(level)} for level in self.simplices]
        bclose: set[Simplex] = set()
        for s in boundary:
            s = tuple(sorted(s))
            for r in range(1, len(s) + 1):
                bclose.update(itertools.combinations(s, r))
        if not bclose <= closure:
            raise HomologyError("boundary subcomplex is not contained in the complex")
        self.boundary = frozenset(bclose)
        self.vertex_labels = list(vertex_labels) if vertex_labels is not None else None

    def __len__(self) -> int:
        return sum(len(level) for level in self.simplices)

    def counts(self) -> list[int]:
        return [len(level) for level in self.simplices]

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * n for k, n in enumerate(self.counts()))

    def chain_complex(self, relative: bool = False) -> Z2ChainComplex:
        basis = [[s for s in level if not (relative and s in self.boundary)] for level in self.simplices]
        pos = [{s: i for i, s in enumerate(b)} for b in basis]
        bnd: list[list[set[int]]] = [[]]
        for k in range(1, self.dim + 1):
            cols = []
            for s in basis[k]:
                col = set()
                for j in range(k + 1):
                    f = s[:j] + s[j + 1:]
                    i = pos[k - 1].get(f)
                    if i is not None:
                        col.add(i)
                cols.append(col)
            bnd.append(cols)
        return Z2ChainComplex([len(b) for b in basis], bnd, basis)

    def relabel(self, key: Callable[[int], object]) -> OrderedSimplicialComplex:
        """Same complex with the vertices re-ranked by ``key``."""
        verts = sorted((s[0] for s in self.simplices[0]), key=key)
        rank = {v: i for i, v in enumerate(verts)}
        f = lambda s: tuple(sorted(rank[v] for v in s))
        labels = None
        if self.vertex_labels is not None:
            labels = [None] * len(verts)
            for v in verts:
                labels[rank[v]] = self.vertex_labels[v]
        top = [f(s) for level in self.simplices for s in level]
        out = OrderedSimplicialComplex(top, [f(s) for s in self.boundary], labels)
        out.rank_map = rank
        return out

    def as_cw(self) -> RegularCW:
        """The complex itself as a regular CW complex (one cell per simplex)."""
        keys, dims, facets, bflag = [], [], [], []
        for k, level in enumerate(self.simplices):
            for s in level:
                keys.append(s)
                dims.append(k)
                facets.append([s[:j] + s[j + 1:] for j in range(k + 1)] if k else [])
                bflag.append(s in self.boundary)
        return regular_cw_from_faces(dims, facets, keys, bflag)


def boundary_chain(chain: Iterable[Simplex]) -> set[Simplex]:
    out: set[Simplex] = set()
    for s in chain:
        for j in range(len(s)):
            out ^= {s[:j] + s[j + 1:]}
    return out


def flags(cw: RegularCW, tops: Iterable[int] | None = None) -> Iterable[Simplex]:
    """Maximal chains of faces below the given cells (default: all top cells)."""
    if tops is None:
        tops = cw.cells(cw.dim)
    for t in tops:
        stack = [(t,)]
        while stack:
            ch = stack.pop()
            low = ch[-1]
            fs = cw.facets[low]
            if not fs:
                yield tuple(reversed(ch))
                continue
            for f in fs:
                stack.append(ch + (f,))


def barycentric(cw: RegularCW, cells: Iterable[int] | None = None) -> OrderedSimplicialComplex:
    """Flag complex of the face poset; vertex rank = cw id, i.e. (dimension, key) order.

    ``cells`` restricts to the subdivision of the closure of those cells.
    """
    tops = None
    if cells is not None:
        tops = list(cells)
    simplices: list[Simplex] = []
    boundary: list[Simplex] = []
    if tops is None:
        # all maximal chains, including those under cells of lower dimension that are maximal
        up = cw.cofacets()
        tops = [i for i in range(cw.n_cells) if not up[i]]
    for fl in flags(cw, tops):
        if len(set(fl)) != len(fl):
            raise HomologyError("non-regular incidence")
        simplices.append(fl)
    for fl in simplices:
        bverts = [v for v in fl if cw.boundary[v]]
        if len(bverts) > 0:
            boundary.append(tuple(bverts))
    # a simplex of the subdivision lies in the boundary iff all its cells do; boundary
    # cells form a subcomplex so the boundary part of a flag is its boundary face
    out = OrderedSimplicialComplex(simplices, [b for b in boundary if all(cw.boundary[v] for v in b)],
                                   list(range(cw.n_cells)))
    return out


# ---------------------------------------------------------------------------
# chain complexes


@dataclass
class Z2ChainComplex:
    sizes: list[int]
    boundaries: list[list[set[int]]]  # boundaries[k][j] = rows of d_k applied to basis element j
    basis: list[list] | None = None

    def rank(self, k: int) -> int:
        if k <= 0 or k >= len(self.sizes):
            return 0
        return rank_z2(self.boundaries[k])

    def betti(self) -> list[int]:
        ranks = [self.rank(k) for k in range(len(self.sizes) + 1)]
        return [self.sizes[k] - ranks[k] - ranks[k + 1] for k in range(len(self.sizes))]

    def check_dd(self) -> bool:
        for k in range(2, len(self.sizes)):
            for col in self.boundaries[k]:
                acc: set[int] = set()
                for j in col:
                    acc ^= self.boundaries[k - 1][j]
                if acc:
                    return False
        return True


def z2_homology(cx: Z2ChainComplex) -> list[int]:
    return cx.betti()


def homology_basis(k_complex: OrderedSimplicialComplex, k: int) -> list[set[Simplex]]:
    """Cycles representing a basis of H_k (absolute)."""
    cc = k_complex.chain_complex()
    basis = cc.basis[k]
    kred = Reducer(track=True)
    if k >= 1:
        for col in cc.boundaries[k]:
            kred.add(col)
        cycles = [set(c) for c in kred.kernel]
    else:
        cycles = [{i} for i in range(len(basis))]
    bred = Reducer()
    if k + 1 < len(cc.sizes):
        for col in cc.boundaries[k + 1]:
            bred.add(col)
    out = []
    for z in cycles:
        if bred.add(z):
            out.append({basis[i] for i in z})
    return out


def cohomology_basis(kx: OrderedSimplicialComplex, k: int) -> list[set[Simplex]]:
    """Cocycles dual to a homology basis: alpha_i(z_j) = delta_ij."""
    cc = kx.chain_complex()
    pos = kx.index[k]
    zs = homology_basis(kx, k)
    cols: list[set[int]] = []
    if k + 1 < len(cc.sizes):
        red = Reducer()
        for col in cc.boundaries[k + 1]:
            red.add(col)
        cols = list(red.pivots.values())
    else:
        red = Reducer()
    # bring the cycles to distinct pivots not used by boundaries
    zred = Reducer(track=True)
    reduced = []
    for z in zs:
        r, _ = red.reduce({pos[s] for s in z})
        reduced.append(r)
    for r in reduced:
        zred.add(r)
    zcols = list(zred.pivots.values())
    out = []
    # functional that is 1 on exactly one reduced cycle column; then convert to the original basis
    alphas_red = []
    for i in range(len(zcols)):
        targets = [0] * len(cols) + [1 if j == i else 0 for j in range(len(zcols))]
        alphas_red.append(dual_functional(cols + zcols, targets))
    # alphas_red evaluate on original cycles z_j via the combination matrix; invert it
    m = [[len(a & reduced[j]) % 2 for j in range(len(zs))] for a in alphas_red]
    inv = _invert_z2(m)
    for i in range(len(zs)):
        a: set[int] = set()
        for j in range(len(zs)):
            if inv[i][j]:
                a ^= alphas_red[j]
        out.append({kx.simplices[k][x] for x in a})
    return out


def _invert_z2(m: list[list[int]]) -> list[list[int]]:
    n = len(m)
    a = [row[:] + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            raise HomologyError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        for r in range(n):
            if r != col and a[r][col]:
                a[r] = [x ^ y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


# ---------------------------------------------------------------------------
# products


def coboundary(kx: OrderedSimplicialComplex, alpha: set[Simplex], k: int) -> set[Simplex]:
    out: set[Simplex] = set()
    for s in kx.simplices[k + 1] if k + 1 <= kx.dim else []:
        n = sum(1 for j in range(k + 2) if s[:j] + s[j + 1:] in alpha)
        if n % 2:
            out.add(s)
    return out


def cup(kx: OrderedSimplicialComplex, alpha: set[Simplex], p: int, beta: set[Simplex], q: int) -> set[Simplex]:
    """Alexander-Whitney product: front p-face times back q-face."""
    if p + q > kx.dim:
        return set()
    return {s for s in kx.simplices[p + q] if s[: p + 1] in alpha and s[p:] in beta}


def cap(chain: Iterable[Simplex], alpha: set[Simplex], q: int) -> set[Simplex]:
    """Cap product: each simplex contributes its front face when alpha is 1 on its back q-face."""
    out: set[Simplex] = set()
    for s in chain:
        k = len(s) - 1
        if s[k - q:] in alpha:
            out ^= {s[: k - q + 1]}
    return out


def evaluate(alpha: set[Simplex], chain: Iterable[Simplex]) -> int:
    return sum(1 for s in chain if s in alpha) % 2


def fundamental_class(kx: OrderedSimplicialComplex) -> set[Simplex]:
    """Sum of top simplices, checked to be a cycle relative to the boundary."""
    top = set(kx.simplices[kx.dim])
    rest = boundary_chain(top)
    if any(s not in kx.boundary for s in rest):
        raise HomologyError("sum of top simplices is not a relative cycle")
    return top


def intersection_form(kx: OrderedSimplicialComplex, k: int | None = None) -> list[list[int]]:
    """Matrix of <a_i ∪ a_j, [M]> on a basis of H^k of a closed 2k-manifold."""
    if k is None:
        if kx.dim % 2:
            raise HomologyError("odd-dimensional complex")
        k = kx.dim // 2
    fund = fundamental_class(kx)
    basis = cohomology_basis(kx, k)
    return [[evaluate(cup(kx, a, k, b, k), fund) for b in basis] for a in basis]


# ---------------------------------------------------------------------------
# surfaces


@dataclass
class SurfaceClass:
    orientable: bool
    genus: int
    boundary_components: int
    euler_characteristic: int

    def as_tuple(self) -> tuple[bool, int, int]:
        return (self.orientable, self.genus, self.boundary_components)


def classify_simplicial_surface(triangles: Iterable[Simplex]) -> SurfaceClass:
    tris = sorted({tuple(sorted(t)) for t in triangles})
    if not tris:
        raise HomologyError("empty surface")
    edge_faces: dict[Simplex, list[int]] = defaultdict(list)
    for i, t in enumerate(tris):
        for j in range(3):
            edge_faces[t[:j] + t[j + 1:]].append(i)
    if any(len(v) > 2 for v in edge_faces.values()):
        raise HomologyError("an edge lies in more than two triangles")
    verts = {v for t in tris for v in t}
    chi = len(verts) - len(edge_faces) + len(tris)
    # orientation: triangle i with sign s induces (-1)^j s on its j-th face
    sign: dict[int, int] = {}
    orientable = True
    adj: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for e, fs in edge_faces.items():
        if len(fs) == 2:
            a, b = fs
            ja = next(j for j in range(3) if tris[a][:j] + tris[a][j + 1:] == e)
            jb = next(j for j in range(3) if tris[b][:j] + tris[b][j + 1:] == e)
            rel = -((-1) ** (ja + jb))
            adj[a].append((b, rel))
            adj[b].append((a, rel))
    comps = 0
    for start in range(len(tris)):
        if start in sign:
            continue
        comps += 1
        sign[start] = 1
        stack = [start]
        while stack:
            x = stack.pop()
            for y, rel in adj[x]:
                want = sign[x] * rel
                if y not in sign:
                    sign[y] = want
                    stack.append(y)
                elif sign[y] != want:
                    orientable = False
    # boundary circles: components of the graph of boundary edges
    bedges = [e for e, fs in edge_faces.items() if len(fs) == 1]
    uf_nodes = sorted({v for e in bedges for v in e})
    pos = {v: i for i, v in enumerate(uf_nodes)}
    uf = UnionFind(len(uf_nodes))
    deg: dict[int, int] = defaultdict(int)
    for a, b in bedges:
        uf.union(pos[a], pos[b])
        deg[a] += 1
        deg[b] += 1
    if any(d != 2 for d in deg.values()):
        raise HomologyError("boundary is not a union of circles")
    nb = len({uf.find(i) for i in range(len(uf_nodes))})
    if comps != 1:
        raise HomologyError("surface is not connected")
    twice_genus = 2 - chi - nb
    genus = twice_genus // 2 if orientable else twice_genus
    return SurfaceClass(orientable, genus, nb, chi)


def classify_surface(obj) -> SurfaceClass:
    """Classify a connected compact surface given as a P2 complex, a 2-dim CW or triangles."""
    if isinstance(obj, GluingComplex):
        if obj.celltype.dim != 2:
            raise HomologyError("not a surface complex")
        cw = truncate_ideal(obj).cw
        return classify_simplicial_surface(barycentric(cw).simplices[2])
    if isinstance(obj, RegularCW):
        if obj.dim != 2:
            raise HomologyError("not a surface complex")
        return classify_simplicial_surface(barycentric(obj).simplices[2])
    return classify_simplicial_surface(obj)


def subdivided_cells(cw: RegularCW, cells: Iterable[int]) -> list[Simplex]:
    """The full flags subdividing the given cells (top simplices of their subdivision)."""
    return [fl for fl in flags(cw, cells)]


# ---------------------------------------------------------------------------
# self-intersection


@dataclass
class PairingResult:
    value: int
    certificate: dict
    runs: list[dict] = field(default_factory=list)

    @property
    def stable(self) -> bool:
        return all(r["value"] == self.value for r in self.runs)


def _digest(items: Iterable) -> str:
    h = hashlib.sha256()
    for x in sorted(items):
        h.update(repr(x).encode())
    return h.hexdigest()[:16]


@dataclass
class Neighborhood:
    complex: OrderedSimplicialComplex
    surface: set[Simplex]
    dual_disc: set[Simplex]
    core: set[int]  # vertices of the subdivided surface


def surface_neighborhood(cw: RegularCW, surface_cells: Iterable[int], order: str = "dimension",
                         transverse_cell: int | None = None) -> Neighborhood:
    """Closed star of the subdivided surface inside the barycentric subdivision of ``cw``.

    ``surface_cells`` are 2-cells forming a closed surface away from the
    boundary. The star is a regular neighbourhood; its frontier is the set of
    simplices without a vertex on the surface. Also returns the dual disc of
    one surface cell, a relative 2-cycle meeting the surface once.
    """
    scells = sorted(set(surface_cells))
    if any(cw.dims[c] != 2 for c in scells):
        raise HomologyError("surface cells must be 2-dimensional")
    core: set[int] = set(scells)
    for c in scells:
        core |= cw.below(c)
    if any(cw.boundary[c] for c in core):
        raise HomologyError("surface meets the boundary")
    up = cw.cofacets()
    # top cells containing a core cell
    above: set[int] = set()
    stack = list(core)
    while stack:
        x = stack.pop()
        for y in up[x]:
            if y not in above:
                above.add(y)
                stack.append(y)
    tops = sorted(x for x in above if not up[x])
    star = [fl for fl in flags(cw, tops) if any(v in core for v in fl)]
    if order == "dimension":
        key = lambda v: v
    elif order == "reverse":
        key = lambda v: (-cw.dims[v], v)
    elif order.startswith("shuffle"):
        seed = int(order[len("shuffle"):] or 0)
        rng = random.Random(seed)
        perm = list(range(cw.n_cells))
        rng.shuffle(perm)
        key = lambda v: perm[v]
    else:
        raise HomologyError(f"unknown vertex order {order!r}")
    verts = sorted({v for fl in star for v in fl}, key=key)
    rank = {v: i for i, v in enumerate(verts)}
    R = lambda s: tuple(sorted(rank[v] for v in s))
    closure: set[Simplex] = set()
    for fl in star:
        s = R(fl)
        for r in range(1, len(s) + 1):
            closure.update(itertools.combinations(s, r))
    rcore = {rank[v] for v in core}
    frontier = [s for s in closure if not any(v in rcore for v in s)]
    kx = OrderedSimplicialComplex([R(fl) for fl in star], frontier, [verts[i] for i in range(len(verts))])
    surface = {R(fl) for fl in flags(cw, scells)}
    f = scells[0] if transverse_cell is None else transverse_cell
    if f not in scells:
        raise HomologyError("transverse cell is not on the surface")
    disc = {R((f, c3, c4)) for c3 in up[f] for c4 in up[c3]}
    return Neighborhood(kx, surface, disc, rcore)


def poincare_dual(nb: Neighborhood, row_order: str = "natural", perturb_seed: int | None = None) -> tuple[set[Simplex], dict]:
    """A relative 2-cocycle of the neighbourhood whose cap with [N] is homologous to S.

    The cocycle is built to vanish on relative boundaries and to be 1 on the
    dual disc; the returned certificate records the checks performed.
    """
    kx = nb.complex
    interior2 = [s for s in kx.simplices[2] if s not in kx.boundary]
    if row_order == "reverse":
        interior2.reverse()
    elif row_order != "natural":
        raise HomologyError(f"unknown row order {row_order!r}")
    pos = {s: i for i, s in enumerate(interior2)}
    red = Reducer()
    for t in kx.simplices[3]:
        if t in kx.boundary:
            continue
        col = {pos[f] for f in (t[1:], t[:1] + t[2:], t[:2] + t[3:], t[:3]) if f in pos}
        if col:
            red.add(col)
    disc = {pos[s] for s in nb.dual_disc}
    if boundary_chain(nb.dual_disc) - kx.boundary:
        raise HomologyError("dual disc is not a relative cycle")
    r, _ = red.reduce(disc)
    if not r:
        raise HomologyError("dual disc is a relative boundary")
    cols = list(red.pivots.values()) + [r]
    a = dual_functional(cols, [0] * (len(cols) - 1) + [1])
    alpha = {interior2[i] for i in a}
    if perturb_seed is not None:
        rng = random.Random(perturb_seed)
        interior1 = [s for s in kx.simplices[1] if s not in kx.boundary]
        beta = {s for s in interior1 if rng.random() < 0.5}
        alpha ^= coboundary(kx, beta, 1)
    if coboundary(kx, alpha, 2) - kx.boundary:
        raise HomologyError("dual is not a relative cocycle")
    if alpha & kx.boundary:
        raise HomologyError("dual does not vanish on the frontier")
    fund = fundamental_class(kx)
    capped = cap(fund, alpha, 2)
    # homology check in N: capped + S must be a boundary of a 3-chain of N
    pos_all = kx.index[2]
    bred = Reducer()
    for t in kx.simplices[3]:
        bred.add({pos_all[t[:j] + t[j + 1:]] for j in range(4)})
    diff = {pos_all[s] for s in capped ^ nb.surface}
    homologous = bred.in_span(diff)
    if not homologous:
        raise HomologyError("cap of the dual is not homologous to the surface")
    surface_not_boundary = not bred.in_span({pos_all[s] for s in nb.surface})
    cert = {
        "dual_support": len(alpha),
        "dual_hash": _digest(alpha),
        "relative_cocycle": True,
        "cap_homologous_to_surface": homologous,
        "surface_nonzero": surface_not_boundary,
        "disc_value": evaluate(alpha, nb.dual_disc),
    }
    return alpha, cert


def _pair(nb: Neighborhood, alpha: set[Simplex]) -> tuple[int, int]:
    kx = nb.complex
    fund = set(kx.simplices[kx.dim])
    cup_value = sum(1 for s in fund if s[:3] in alpha and s[2:] in alpha) % 2
    return cup_value, evaluate(alpha, nb.surface)


def self_intersection_mod2(cw: RegularCW, surface_cells: Iterable[int], *, variants: bool = True,
                           subdivide: bool = True) -> PairingResult:
    """S·S mod 2 as <α ∪ α, [N, ∂N]> for the dual α of S in a regular neighbourhood N.

    With ``variants`` the value is recomputed with a second dual (different
    elimination order plus a coboundary), a different transverse disc, a
    reversed vertex order, and, with ``subdivide``, after one further
    barycentric subdivision. All runs must agree.
    """
    surface_cells = sorted(set(surface_cells))
    runs = []

    def run(tag: str, nb: Neighborhood, row_order="natural", seed=None):
        alpha, cert = poincare_dual(nb, row_order, seed)
        v_cup, v_eval = _pair(nb, alpha)
        if v_cup != v_eval:
            raise HomologyError(f"{tag}: cup square {v_cup} differs from evaluation on S {v_eval}")
        entry = {"run": tag, "value": v_cup, "simplices": len(nb.complex), **cert}
        runs.append(entry)
        return entry

    nb = surface_neighborhood(cw, surface_cells)
    first = run("base", nb)
    if variants:
        run("re-solve", nb, "reverse", 1)
        run("other-disc", surface_neighborhood(cw, surface_cells, transverse_cell=surface_cells[-1]))
        run("reverse-order", surface_neighborhood(cw, surface_cells, order="reverse"), "natural", 2)
        if subdivide:
            cw2 = nb.complex.as_cw()
            pos = {k: i for i, k in enumerate(cw2.keys)}
            s2 = [pos[t] for t in sorted(nb.surface)]
            run("subdivided", surface_neighborhood(cw2, s2))
    values = {r["value"] for r in runs}
    if len(values) != 1:
        raise HomologyError(f"pairing runs disagree: {runs}")
    cert = {k: v for k, v in first.items() if k not in ("run", "value")}
    return PairingResult(first["value"], cert, runs)


def intersection_mod2(cw: RegularCW, surface_cells: Iterable[int], other_cells: Iterable[int]) -> int:
    """S·T mod 2: the dual of S in its neighbourhood evaluated on T ∩ N."""
    nb = surface_neighborhood(cw, surface_cells)
    alpha, _ = poincare_dual(nb)
    rank = {v: i for i, v in enumerate(nb.complex.vertex_labels)}
    other = []
    for fl in flags(cw, sorted(set(other_cells))):
        if all(v in rank for v in fl):
            s = tuple(sorted(rank[v] for v in fl))
            if any(v in nb.core for v in s):
                other.append(s)
    return evaluate(alpha, other)
