"""Finite simplicial complexes with exact rational coordinates.

Cells are tuples of strictly increasing vertex ids.  Each simplex is oriented
by increasing vertex order and the incidence sign of omitting the i-th vertex
is (-1)^i, which makes the composite of two boundary steps vanish without any
further bookkeeping.  Coordinates are Fractions throughout; complexes are
immutable after construction.
"""

import itertools
from fractions import Fraction

from .linalg import RationalMatrix, feasible_strict


class GeometryError(ValueError):
    pass


def _as_cell(vertices):
    cell = tuple(sorted(vertices))
    if len(set(cell)) != len(cell):
        raise ValueError("cell with repeated vertices: %r" % (vertices,))
    return cell


def faces_of(cell):
    """All nonempty proper and improper faces of a cell."""
    out = []
    for k in range(1, len(cell) + 1):
        out.extend(itertools.combinations(cell, k))
    return out


class SimplicialComplex:
    """Embedded finite simplicial complex.

    ``coordinates`` maps vertex id -> tuple of Fractions (ambient point),
    ``cells`` is the face-closed set of simplices.  Use :func:`build_complex`
    to construct and validate instances.
    """

    def __init__(self, ambient_dim, coordinates, cells):
        self.ambient_dim = ambient_dim
        self.coordinates = {v: tuple(Fraction(x) for x in p) for v, p in coordinates.items()}
        self.cells = frozenset(cells)
        self._cofaces = {c: [] for c in self.cells}
        self._facets = {c: [] for c in self.cells}
        for c in self.cells:
            if len(c) > 1:
                for i in range(len(c)):
                    f = c[:i] + c[i + 1:]
                    sign = -1 if i % 2 else 1
                    self._facets[c].append((f, sign))
                    self._cofaces[f].append(c)
        for c in self._cofaces:
            self._cofaces[c].sort()
        self._chambers_cache = {}
        self._star_cut_cache = {}

    # -- basic combinatorics -------------------------------------------------

    def dim(self, cell):
        return len(cell) - 1

    @property
    def dimension(self):
        return max(len(c) for c in self.cells) - 1 if self.cells else -1

    def cells_of_dim(self, k):
        return sorted(c for c in self.cells if len(c) == k + 1)

    def sorted_cells(self):
        return sorted(self.cells, key=lambda c: (len(c), c))

    def facets(self, cell):
        """Codimension-one faces with incidence signs, as (face, sign) pairs."""
        return self._facets[cell]

    def cofacets(self, cell):
        """Codimension-one cofaces."""
        return self._cofaces[cell]

    def incidence(self, face, cell):
        for f, s in self._facets[cell]:
            if f == face:
                return s
        raise KeyError("not a codimension-one pair: %r < %r" % (face, cell))

    def is_face(self, a, b):
        return set(a) <= set(b)

    def star(self, cell):
        """Open star: all cofaces (every codimension), including the cell."""
        if cell not in self.cells:
            raise KeyError("cell not in complex: %r" % (cell,))
        s = set(cell)
        return frozenset(c for c in self.cells if s <= set(c))

    def closed_star(self, cell):
        out = set()
        for c in self.star(cell):
            out.update(faces_of(c))
        return frozenset(x for x in out if x in self.cells)

    def link(self, cell):
        """Faces of the closed star disjoint from the cell."""
        s = set(cell)
        return frozenset(c for c in self.closed_star(cell) if not (s & set(c)))

    def link_vertices(self, cell):
        return sorted(c[0] for c in self.link(cell) if len(c) == 1)

    def maximal_cells(self):
        return sorted(c for c in self.cells if not self._cofaces[c])

    def euler_characteristic(self):
        return sum((-1) ** (len(c) - 1) for c in self.cells)

    def is_coface_closed(self, cells):
        cells = set(cells)
        return all(set(self._cofaces[c]) <= cells for c in cells)

    def is_face_closed(self, cells):
        cells = set(cells)
        return all(f in cells for c in cells for f, _ in self._facets[c])

    # -- geometry ------------------------------------------------------------

    def point(self, v):
        return self.coordinates[v]

    def barycenter(self, cell):
        pts = [self.coordinates[v] for v in cell]
        n = len(pts)
        return tuple(sum(p[i] for p in pts) / n for i in range(self.ambient_dim))

    def direction_vectors(self, cell):
        """Edge vectors spanning the cell's direction space."""
        p0 = self.coordinates[cell[0]]
        return [tuple(self.coordinates[v][i] - p0[i] for i in range(self.ambient_dim))
                for v in cell[1:]]

    def boundary_matrix(self, k):
        """Signed incidence matrix from k-cells to (k-1)-cells."""
        rows = self.cells_of_dim(k - 1)
        cols = self.cells_of_dim(k)
        idx = {c: i for i, c in enumerate(rows)}
        m = RationalMatrix.zero(len(rows), len(cols))
        for j, c in enumerate(cols):
            for f, s in self._facets[c]:
                m.data[idx[f]][j] = Fraction(s)
        return m

    def subcomplex(self, cells):
        """Face-closed subset of cells as its own complex (shared coordinates)."""
        cells = frozenset(cells)
        if not self.is_face_closed(cells):
            raise ValueError("subcomplex cells are not face-closed")
        verts = {c[0] for c in cells if len(c) == 1}
        coords = {v: self.coordinates[v] for v in verts}
        return SimplicialComplex(self.ambient_dim, coords, cells)


class CellRegion:
    """Subset of a complex's open cells, with its topological kind.

    kind is one of "open" (coface-closed), "closed" (face-closed) or
    "locally_closed" (difference of two closed sets).
    """

    def __init__(self, complex, cells, kind=None):
        self.complex = complex
        self.cells = frozenset(_as_cell(c) if not isinstance(c, tuple) else c for c in cells)
        for c in self.cells:
            if c not in complex.cells:
                raise ValueError("region cell not in complex: %r" % (c,))
        is_open = complex.is_coface_closed(self.cells)
        is_closed = complex.is_face_closed(self.cells)
        if kind is None:
            if is_open:
                kind = "open"
            elif is_closed:
                kind = "closed"
            elif self.is_locally_closed():
                kind = "locally_closed"
            else:
                raise ValueError("region is not locally closed")
        else:
            ok = {
                "open": is_open,
                "closed": is_closed,
                "locally_closed": is_open or is_closed or self.is_locally_closed(),
            }.get(kind)
            if ok is None:
                raise ValueError("unknown region kind %r" % (kind,))
            if not ok:
                raise ValueError("region does not have kind %r" % (kind,))
        self.kind = kind

    def is_locally_closed(self):
        # Z is locally closed iff no chain sigma < tau < rho with sigma, rho in Z
        # and tau outside; equivalently closure(Z) minus Z is face-closed.
        closure = set()
        for c in self.cells:
            closure.update(f for f in faces_of(c) if f in self.complex.cells)
        rest = closure - set(self.cells)
        return self.complex.is_face_closed(rest) if rest else True

    def closure_cells(self):
        out = set()
        for c in self.cells:
            out.update(f for f in faces_of(c) if f in self.complex.cells)
        return frozenset(out)

    def __contains__(self, cell):
        return cell in self.cells

    def __iter__(self):
        return iter(sorted(self.cells, key=lambda c: (len(c), c)))

    def __len__(self):
        return len(self.cells)


class SimplicialMap:
    """Simplicial map given by a vertex assignment; cells map onto cells."""

    def __init__(self, source, target, vertex_map):
        self.source = source
        self.target = target
        self.vertex_map = dict(vertex_map)
        for v in source.coordinates:
            if v not in self.vertex_map:
                raise ValueError("vertex %r has no image" % v)
        for c in source.cells:
            if self.image(c) not in target.cells:
                raise ValueError("image of %r is not a cell of the target" % (c,))

    def image(self, cell):
        return tuple(sorted(set(self.vertex_map[v] for v in cell)))

    def fiber_cells(self, cell):
        """Open cells of the source mapping onto the given open target cell."""
        return frozenset(c for c in self.source.cells if self.image(c) == cell)

    @classmethod
    def identity(cls, complex):
        return cls(complex, complex, {v: v for v in complex.coordinates})

    @classmethod
    def to_point(cls, complex, point=None):
        pt = point if point is not None else point_complex()
        v0 = next(iter(pt.coordinates))
        return cls(complex, pt, {v: v0 for v in complex.coordinates})


class CellMap:
    """Refinement map: each cell of the source lies inside one cell of the target."""

    def __init__(self, source, target, parent):
        self.source = source
        self.target = target
        self.parent = dict(parent)

    def image(self, cell):
        return self.parent[cell]

    @classmethod
    def identity(cls, complex):
        return cls(complex, complex, {c: c for c in complex.cells})


def point_complex():
    return SimplicialComplex(0, {0: ()}, frozenset({(0,)}))


def build_complex(coordinates, maximal_cells, ambient_dim=None, check_embedding=True):
    """Build a complex from vertex coordinates and maximal cells.

    Computes the face closure, validates affine independence of every cell
    and (optionally) that distinct open cells have disjoint realizations.
    """
    coords = {v: tuple(Fraction(x) for x in p) for v, p in coordinates.items()}
    if ambient_dim is None:
        ambient_dim = len(next(iter(coords.values()))) if coords else 0
    for v, p in coords.items():
        if len(p) != ambient_dim:
            raise GeometryError("vertex %r has %d coordinates, ambient dim is %d"
                                % (v, len(p), ambient_dim))
    cells = set()
    for mc in maximal_cells:
        for v in mc:
            if v not in coords:
                raise GeometryError("unknown vertex id %r" % (v,))
        cell = _as_cell(mc)
        cells.update(faces_of(cell))
    cx = SimplicialComplex(ambient_dim, coords, frozenset(cells))
    for c in cx.cells:
        if not _affinely_independent(cx, c):
            raise GeometryError("affinely dependent vertices in cell %r" % (c,))
    if check_embedding:
        _check_embedding(cx)
    return cx


def _affinely_independent(cx, cell):
    vecs = cx.direction_vectors(cell)
    if not vecs:
        return True
    m = RationalMatrix.from_rows(vecs)
    return m.rank() == len(vecs)


def _bounding_box(cx, cell):
    pts = [cx.coordinates[v] for v in cell]
    lo = tuple(min(p[i] for p in pts) for i in range(cx.ambient_dim))
    hi = tuple(max(p[i] for p in pts) for i in range(cx.ambient_dim))
    return lo, hi


def _check_embedding(cx):
    cells = cx.sorted_cells()
    boxes = {c: _bounding_box(cx, c) for c in cells}
    for i, a in enumerate(cells):
        for b in cells[i + 1:]:
            la, ha = boxes[a]
            lb, hb = boxes[b]
            if any(ha[k] < lb[k] or hb[k] < la[k] for k in range(cx.ambient_dim)):
                continue
            if set(a) <= set(b) or set(b) <= set(a):
                continue
            if _open_cells_intersect(cx, a, b):
                raise GeometryError("open cells %r and %r overlap" % (a, b))


def _open_cells_intersect(cx, a, b):
    # Solve sum lam_i A_i = sum mu_j B_j, sum lam = sum mu = 1, lam, mu > 0.
    # Substitute the two affine constraints, then ask for a strict witness.
    na, nb = len(a), len(b)
    nvar = na + nb
    # equality rows: coordinates and the two sum constraints folded into
    # homogeneous form by treating the system projectively: add variable t
    # with sum lam = t, sum mu = t, t > 0.
    nvar += 1
    eqs = []
    for k in range(cx.ambient_dim):
        row = [cx.coordinates[v][k] for v in a] + [-cx.coordinates[v][k] for v in b] + [0]
        eqs.append(row)
    eqs.append([1] * na + [0] * nb + [-1])
    eqs.append([0] * na + [1] * nb + [-1])
    strict = []
    for i in range(na + nb):
        row = [Fraction(0)] * nvar
        row[i] = Fraction(1)
        strict.append(row)
    trow = [Fraction(0)] * nvar
    trow[-1] = Fraction(1)
    strict.append(trow)
    return feasible_strict(strict, eqs) is not None


# -- star, link, regions -----------------------------------------------------


def star_link(cx, cell):
    """Open star as a CellRegion plus the link as a set of cells."""
    if cell not in cx.cells:
        raise KeyError("cell not in complex: %r" % (cell,))
    return CellRegion(cx, cx.star(cell), "open"), cx.link(cell)


# -- level-set subdivision ----------------------------------------------------


def level_value(cx, functional, v):
    p = cx.coordinates[v]
    return sum(Fraction(c) * x for c, x in zip(functional, p))


def subdivide_along_level(cx, functional, c):
    """Refine so that every open cell lies in {f<c}, {f=c} or {f>c}.

    ``functional`` is a rational covector (tuple of ambient coefficients);
    the level is f(x) = c.  Returns (refined complex, CellMap to cx).  Each
    crossed edge is split at the exact crossing point and the split
    propagates to the incident cells (stellar subdivision), which suffices:
    afterwards no cell has vertices strictly on both sides.
    """
    c = Fraction(c)
    values = {v: level_value(cx, functional, v) for v in cx.coordinates}
    crossed = sorted(
        cell for cell in cx.cells
        if len(cell) == 2 and (values[cell[0]] - c) * (values[cell[1]] - c) < 0
    )
    if not crossed:
        return cx, CellMap.identity(cx)
    coords = dict(cx.coordinates)
    next_id = max(coords) + 1
    cells = set(cx.cells)
    parent = {cell: cell for cell in cells}
    for edge in crossed:
        a, b = edge
        va, vb = values[a] - c, values[b] - c
        t = va / (va - vb)  # position of the crossing along a->b
        pa, pb = coords[a], coords[b]
        w = next_id
        next_id += 1
        coords[w] = tuple(pa[i] + t * (pb[i] - pa[i]) for i in range(cx.ambient_dim))
        new_cells = set()
        new_parent = {}
        for cell in cells:
            if a in cell and b in cell:
                rest = tuple(v for v in cell if v not in (a, b))
                for keep in (a, b):
                    piece = _as_cell(rest + (keep, w))
                    new_cells.add(piece)
                    new_parent[piece] = parent[cell]
                low = _as_cell(rest + (w,))
                new_cells.add(low)
                new_parent[low] = parent[cell]
            else:
                new_cells.add(cell)
                new_parent[cell] = parent[cell]
        cells = new_cells
        parent = new_parent
    verts = {cl[0] for cl in cells if len(cl) == 1}
    refined = SimplicialComplex(cx.ambient_dim, {v: coords[v] for v in verts}, frozenset(cells))
    # parent map must send each new open cell to the old open cell containing it
    cmap = CellMap(refined, cx, parent)
    _check_level_purity(refined, functional, c)
    if refined.euler_characteristic() != cx.euler_characteristic():
        raise GeometryError("subdivision changed the Euler characteristic")
    return refined, cmap


def _check_level_purity(cx, functional, c):
    values = {v: level_value(cx, functional, v) - Fraction(c) for v in cx.coordinates}
    for cell in cx.cells:
        vs = [values[v] for v in cell]
        if any(x > 0 for x in vs) and any(x < 0 for x in vs):
            raise GeometryError("cell %r still crosses the level" % (cell,))


def cell_side(cx, functional, c, cell):
    """-1, 0 or +1 for a cell lying in {f<c}, {f=c}, {f>c}; requires purity."""
    vals = [level_value(cx, functional, v) - Fraction(c) for v in cell]
    if any(x > 0 for x in vals) and any(x < 0 for x in vals):
        raise GeometryError("cell %r crosses the level" % (cell,))
    if any(x > 0 for x in vals):
        return 1
    if any(x < 0 for x in vals):
        return -1
    return 0


# -- barycentric subdivision ---------------------------------------------------


def barycentric_subdivision(cx):
    """One barycentric subdivision; returns (refined complex, CellMap)."""
    bary_id = {}
    coords = {}
    next_id = 0
    for cell in cx.sorted_cells():
        bary_id[cell] = next_id
        coords[next_id] = cx.barycenter(cell)
        next_id += 1
    cells = set()
    parent = {}
    maximal = cx.maximal_cells()

    def chains(top):
        fs = sorted((f for f in faces_of(top)), key=lambda c: (len(c), c))
        out = []

        def extend(chain, last):
            out.append(tuple(chain))
            for f in fs:
                if len(f) > len(last) and set(last) < set(f):
                    chain.append(f)
                    extend(chain, f)
                    chain.pop()

        for f in fs:
            extend([f], f)
        return out

    for top in maximal:
        for chain in chains(top):
            cell = _as_cell(bary_id[c] for c in chain)
            cells.add(cell)
            p = chain[-1]
            if cell not in parent or len(parent[cell]) < len(p):
                parent[cell] = p
    verts = {cl[0] for cl in cells if len(cl) == 1}
    refined = SimplicialComplex(cx.ambient_dim, {v: coords[v] for v in verts}, frozenset(cells))
    return refined, CellMap(refined, cx, parent)


# -- staircase products --------------------------------------------------------


def staircase_product(cx, cz):
    """Staircase triangulation of the product of two embedded complexes.

    Vertices are pairs, ordered lexicographically; the top simplices over a
    pair of maximal cells are the monotone staircase paths, so both
    projections are simplicial vertex maps.  Returns (product, projection to
    first factor, projection to second factor).
    """
    vx = sorted(cx.coordinates)
    vz = sorted(cz.coordinates)
    pair_id = {}
    coords = {}
    k = 0
    for a in vx:
        for b in vz:
            pair_id[(a, b)] = k
            coords[k] = cx.coordinates[a] + cz.coordinates[b]
            k += 1
    maximal = []
    for s in cx.maximal_cells():
        for t in cz.maximal_cells():
            p, q = len(s) - 1, len(t) - 1
            for path in _staircase_paths(s, t):
                maximal.append(tuple(pair_id[pq] for pq in path))
    prod = build_complex(coords, maximal, ambient_dim=cx.ambient_dim + cz.ambient_dim,
                         check_embedding=False)
    to_x = {pair_id[(a, b)]: a for (a, b) in pair_id}
    to_z = {pair_id[(a, b)]: b for (a, b) in pair_id}
    return prod, SimplicialMap(prod, cx, to_x), SimplicialMap(prod, cz, to_z)


def _staircase_paths(s, t):
    p, q = len(s) - 1, len(t) - 1
    paths = []

    def walk(i, j, acc):
        if i == p and j == q:
            paths.append(acc[:])
            return
        if i < p:
            acc.append((s[i + 1], t[j]))
            walk(i + 1, j, acc)
            acc.pop()
        if j < q:
            acc.append((s[i], t[j + 1]))
            walk(i, j + 1, acc)
            acc.pop()

    walk(0, 0, [(s[0], t[0])])
    return paths
