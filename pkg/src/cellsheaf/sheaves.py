"""Cellular sheaves and bounded complexes of cellular sheaves.

A cellular sheaf assigns a finite-dimensional rational space to each open
cell and a restriction matrix to each codimension-one face relation; the two
composite restrictions around every codimension-two pair must agree
(unsigned convention: all signs live in cochain differentials via incidence
numbers, never in the sheaf data).

Sheaves live on a :class:`CellSpace`: either a whole complex or a subset of
its cells (an open region behaves like the open subspace, a closed one like
a closed subcomplex).
"""

from fractions import Fraction

from .linalg import RationalMatrix, SpaceComplex, column_matrix
from .complexes import faces_of


class SheafValidationError(ValueError):
    pass


class CellSpace:
    """A complex together with the subset of cells a sheaf lives on."""

    def __init__(self, complex, cells=None):
        self.complex = complex
        self.cells = frozenset(complex.cells if cells is None else cells)
        for c in self.cells:
            if c not in complex.cells:
                raise ValueError("space cell not in complex: %r" % (c,))

    def is_full(self):
        return self.cells == self.complex.cells

    def sorted_cells(self):
        return sorted(self.cells, key=lambda c: (len(c), c))

    def dim(self, cell):
        return len(cell) - 1

    def face_pairs(self):
        """Codimension-one pairs (face, cell) with both cells in the space."""
        out = []
        for c in self.sorted_cells():
            for f, _ in self.complex.facets(c):
                if f in self.cells:
                    out.append((f, c))
        return out

    def cofaces_in(self, cell):
        return [c for c in self.complex.cofacets(cell) if c in self.cells]

    def cofaces_all(self, cell):
        """All cells of the space having the given cell as a face (incl. itself)."""
        s = set(cell)
        return sorted((c for c in self.cells if s <= set(c)), key=lambda c: (len(c), c))

    def faces_in(self, cell):
        return sorted((f for f in faces_of(cell) if f in self.cells),
                      key=lambda c: (len(c), c))

    def is_open(self):
        return all(set(self.complex.cofacets(c)) <= self.cells for c in self.cells)

    def sub(self, cells):
        return CellSpace(self.complex, cells)

    def key(self):
        return (id(self.complex), self.cells)

    def __eq__(self, other):
        return isinstance(other, CellSpace) and self.complex is other.complex \
            and self.cells == other.cells

    def __hash__(self):
        return hash(self.key())


class CellularSheaf:
    """Stalk dimensions plus codimension-one restriction matrices."""

    def __init__(self, space, dims, restrictions):
        self.space = space
        self.dims = {c: int(d) for c, d in dims.items() if d}
        self.restrictions = dict(restrictions)
        self._comp_cache = {}

    def dim(self, cell):
        return self.dims.get(cell, 0)

    def restriction_step(self, face, cell):
        m = self.restrictions.get((face, cell))
        if m is None:
            return RationalMatrix.zero(self.dim(cell), self.dim(face))
        return m

    def restriction(self, face, cell):
        """Composite restriction along any face relation face <= cell."""
        if face == cell:
            return RationalMatrix.identity(self.dim(face))
        key = (face, cell)
        got = self._comp_cache.get(key)
        if got is not None:
            return got
        # peel one vertex: any saturated chain gives the same composite
        for f, _ in self.space.complex.facets(cell):
            if set(face) <= set(f):
                m = self.restriction_step(f, cell) * self.restriction(face, f)
                break
        else:
            raise KeyError("%r is not a face of %r" % (face, cell))
        self._comp_cache[key] = m
        return m

    def validate(self):
        for (f, c), m in self.restrictions.items():
            if f not in self.space.cells or c not in self.space.cells:
                raise SheafValidationError("restriction on cells outside the space")
            if len(c) != len(f) + 1 or not set(f) <= set(c):
                raise SheafValidationError(
                    "restriction key %r is not a codimension-one pair" % ((f, c),))
            if m.rows != self.dim(c) or m.cols != self.dim(f):
                raise SheafValidationError(
                    "restriction %r has shape %dx%d, expected %dx%d"
                    % ((f, c), m.rows, m.cols, self.dim(c), self.dim(f)))
        # codimension-two commutation within the space
        for c in self.space.cells:
            for f1, _ in self.space.complex.facets(c):
                if f1 not in self.space.cells or len(f1) < 2:
                    continue
                for f2, _ in self.space.complex.facets(f1):
                    if f2 not in self.space.cells:
                        continue
                    comps = []
                    for mid, _ in self.space.complex.facets(c):
                        if mid in self.space.cells and set(f2) <= set(mid):
                            comps.append(self.restriction_step(mid, c)
                                         * self.restriction_step(f2, mid))
                    for other in comps[1:]:
                        if not (other - comps[0]).is_zero():
                            raise SheafValidationError(
                                "restrictions between %r and %r do not commute" % (f2, c))
        return True

    def total_dim(self):
        return sum(self.dims.values())

    def is_zero(self):
        return not self.dims

    def all_invertible(self):
        """Local-system test: every restriction between nonzero stalks invertible."""
        for f, c in self.space.face_pairs():
            if self.dim(f) != self.dim(c):
                return False
            m = self.restriction_step(f, c)
            if m.rank() != self.dim(f):
                return False
        return True

    @classmethod
    def zero(cls, space):
        return cls(space, {}, {})

    @classmethod
    def constant(cls, space, rank=1):
        dims = {c: rank for c in space.cells}
        rest = {(f, c): RationalMatrix.identity(rank) for f, c in space.face_pairs()}
        return cls(space, dims, rest)

    @classmethod
    def supported_constant(cls, space, cells, rank=1):
        """Rank r on the given cells (identity restrictions inside), 0 elsewhere."""
        cells = frozenset(cells)
        dims = {c: rank for c in cells}
        rest = {}
        for f, c in space.face_pairs():
            if f in cells and c in cells:
                rest[(f, c)] = RationalMatrix.identity(rank)
        return cls(space, dims, rest)


def direct_sum_sheaves(a, b):
    if a.space != b.space:
        raise SheafValidationError("direct sum over different spaces")
    dims = {c: a.dim(c) + b.dim(c) for c in a.space.cells if a.dim(c) + b.dim(c)}
    rest = {}
    for f, c in a.space.face_pairs():
        if dims.get(f, 0) and dims.get(c, 0):
            m = RationalMatrix.zero(dims[c], dims[f])
            _insert(m, 0, 0, a.restriction_step(f, c))
            _insert(m, a.dim(c), a.dim(f), b.restriction_step(f, c))
            rest[(f, c)] = m
    return CellularSheaf(a.space, dims, rest)


def tensor_sheaves(a, b):
    if a.space != b.space:
        raise SheafValidationError("tensor over different spaces")
    dims = {}
    for c in a.space.cells:
        d = a.dim(c) * b.dim(c)
        if d:
            dims[c] = d
    rest = {}
    for f, c in a.space.face_pairs():
        if dims.get(f, 0) and dims.get(c, 0):
            rest[(f, c)] = _kronecker(a.restriction_step(f, c), b.restriction_step(f, c))
    return CellularSheaf(a.space, dims, rest)


def _kronecker(m, n):
    rows = m.rows * n.rows
    cols = m.cols * n.cols
    out = RationalMatrix.zero(rows, cols)
    for i in range(m.rows):
        for j in range(m.cols):
            v = m.data[i][j]
            if not v:
                continue
            for k in range(n.rows):
                for l in range(n.cols):
                    w = n.data[k][l]
                    if w:
                        out.data[i * n.rows + k][j * n.cols + l] = v * w
    return out


class SheafComplex:
    """Bounded complex of cellular sheaves on a common space."""

    def __init__(self, space, sheaves, differentials):
        self.space = space
        self.sheaves = {k: s for k, s in sheaves.items() if not s.is_zero()}
        self.differentials = {}
        for k, comp in differentials.items():
            comp = {c: m for c, m in comp.items() if m.rows and m.cols and not m.is_zero()}
            if comp:
                self.differentials[k] = comp
        self._cache = {}

    def degrees(self):
        return sorted(self.sheaves)

    def sheaf(self, k):
        s = self.sheaves.get(k)
        if s is None:
            return CellularSheaf.zero(self.space)
        return s

    def dim(self, k, cell):
        return self.sheaf(k).dim(cell)

    def diff_at(self, k, cell):
        m = self.differentials.get(k, {}).get(cell)
        if m is None:
            return RationalMatrix.zero(self.dim(k + 1, cell), self.dim(k, cell))
        return m

    def stalk_dims(self, cell):
        return {k: self.dim(k, cell) for k in self.degrees() if self.dim(k, cell)}

    def stalk_complex(self, cell):
        dims = {k: self.dim(k, cell) for k in self.degrees()}
        diffs = {k: self.diff_at(k, cell) for k in self.degrees()}
        return SpaceComplex(dims, diffs, check=False)

    def stalk_cohomology(self, cell):
        return self.stalk_complex(cell).cohomology()

    def total_stalk_dim(self):
        return sum(s.total_dim() for s in self.sheaves.values())

    def is_zero(self):
        return not self.sheaves

    def validate(self):
        for k, s in self.sheaves.items():
            if s.space != self.space:
                raise SheafValidationError("component %d lives on a different space" % k)
            s.validate()
        for k in self.differentials:
            for c, m in self.differentials[k].items():
                if m.rows != self.dim(k + 1, c) or m.cols != self.dim(k, c):
                    raise SheafValidationError(
                        "differential at degree %d, cell %r has wrong shape" % (k, c))
        degs = self.degrees()
        for k in degs:
            for c in self.space.cells:
                if self.dim(k, c):
                    m = self.diff_at(k + 1, c) * self.diff_at(k, c)
                    if not m.is_zero():
                        raise SheafValidationError(
                            "d o d != 0 at degree %d, cell %r" % (k, c))
            # differentials are sheaf morphisms: commute with restrictions
            for f, c in self.space.face_pairs():
                lhs = self.diff_at(k, c) * self.sheaf(k).restriction_step(f, c)
                rhs = self.sheaf(k + 1).restriction_step(f, c) * self.diff_at(k, f)
                if not (lhs - rhs).is_zero():
                    raise SheafValidationError(
                        "differential does not commute with restriction %r < %r"
                        % (f, c))
        return True

    @classmethod
    def from_sheaf(cls, sheaf, degree=0):
        return cls(sheaf.space, {degree: sheaf}, {})

    @classmethod
    def zero(cls, space):
        return cls(space, {}, {})

    def shift(self, n):
        """Shift: result^k = self^{n+k}; differentials multiplied by (-1)^n."""
        sheaves = {k - n: s for k, s in self.sheaves.items()}
        sign = -1 if n % 2 else 1
        diffs = {}
        for k, comp in self.differentials.items():
            diffs[k - n] = {c: (m.scale(sign) if sign < 0 else m) for c, m in comp.items()}
        return SheafComplex(self.space, sheaves, diffs)

    def restrict(self, cells):
        """Restriction of all data to a subset of cells (as a sub-CellSpace)."""
        sub = self.space.sub(cells)
        sheaves = {}
        for k, s in self.sheaves.items():
            dims = {c: d for c, d in s.dims.items() if c in sub.cells}
            rest = {(f, c): m for (f, c), m in s.restrictions.items()
                    if f in sub.cells and c in sub.cells}
            sheaves[k] = CellularSheaf(sub, dims, rest)
        diffs = {k: {c: m for c, m in comp.items() if c in sub.cells}
                 for k, comp in self.differentials.items()}
        return SheafComplex(sub, sheaves, diffs)

    def is_local_system(self):
        return len(self.sheaves) == 1 and all(s.all_invertible() for s in self.sheaves.values())


class SheafMorphism:
    """Degreewise cellwise maps commuting with restrictions and differentials."""

    def __init__(self, source, target, components, check=True):
        if source.space != target.space:
            raise SheafValidationError("morphism between sheaves on different spaces")
        self.source = source
        self.target = target
        self.components = {}
        for k, comp in components.items():
            comp = {c: m for c, m in comp.items() if m.rows and m.cols}
            if comp:
                self.components[k] = comp
        if check:
            self.validate()

    def at(self, k, cell):
        m = self.components.get(k, {}).get(cell)
        if m is None:
            return RationalMatrix.zero(self.target.dim(k, cell), self.source.dim(k, cell))
        return m

    def validate(self):
        space = self.source.space
        degs = sorted(set(self.source.degrees()) | set(self.target.degrees()))
        for k in degs:
            for c in space.cells:
                m = self.at(k, c)
                if m.rows != self.target.dim(k, c) or m.cols != self.source.dim(k, c):
                    raise SheafValidationError("component shape mismatch at %d, %r" % (k, c))
            for f, c in space.face_pairs():
                lhs = self.at(k, c) * self.source.sheaf(k).restriction_step(f, c)
                rhs = self.target.sheaf(k).restriction_step(f, c) * self.at(k, f)
                if not (lhs - rhs).is_zero():
                    raise SheafValidationError("naturality fails at degree %d, %r < %r" % (k, f, c))
            for c in space.cells:
                lhs = self.at(k + 1, c) * self.source.diff_at(k, c)
                rhs = self.target.diff_at(k, c) * self.at(k, c)
                if not (lhs - rhs).is_zero():
                    raise SheafValidationError("chain-map square fails at degree %d, %r" % (k, c))
        return True

    @classmethod
    def zero(cls, source, target):
        return cls(source, target, {}, check=False)

    @classmethod
    def identity(cls, sheaf_complex):
        comps = {}
        for k in sheaf_complex.degrees():
            comps[k] = {c: RationalMatrix.identity(sheaf_complex.dim(k, c))
                        for c in sheaf_complex.space.cells if sheaf_complex.dim(k, c)}
        return cls(sheaf_complex, sheaf_complex, comps, check=False)


def mapping_cone(phi):
    """Mapping cone of a sheaf morphism u: A -> B.

    cone^k = A^{k+1} (+) B^k with differential [[-dA, 0], [u, dB]]; returns
    (cone, inclusion B -> cone, projection cone -> A[1]).
    """
    A, B = phi.source, phi.target
    space = A.space
    degs = sorted(set(k - 1 for k in A.degrees()) | set(B.degrees()))
    sheaves = {}
    for k in degs:
        dims = {}
        rest = {}
        for c in space.cells:
            d = A.dim(k + 1, c) + B.dim(k, c)
            if d:
                dims[c] = d
        for f, c in space.face_pairs():
            if dims.get(f, 0) and dims.get(c, 0):
                rest[(f, c)] = _block2(
                    A.sheaf(k + 1).restriction_step(f, c), B.sheaf(k).restriction_step(f, c),
                    A.dim(k + 1, c), B.dim(k, c), A.dim(k + 1, f), B.dim(k, f))
        sheaves[k] = CellularSheaf(space, dims, rest)
    diffs = {}
    for k in degs:
        comp = {}
        for c in space.cells:
            rows = A.dim(k + 2, c) + B.dim(k + 1, c)
            cols = A.dim(k + 1, c) + B.dim(k, c)
            if not rows or not cols:
                continue
            m = RationalMatrix.zero(rows, cols)
            _insert(m, 0, 0, A.diff_at(k + 1, c).scale(-1))
            _insert(m, A.dim(k + 2, c), 0, phi.at(k + 1, c))
            _insert(m, A.dim(k + 2, c), A.dim(k + 1, c), B.diff_at(k, c))
            comp[c] = m
        diffs[k] = comp
    cone = SheafComplex(space, sheaves, diffs)
    incl = {}
    proj = {}
    for k in degs:
        ic = {}
        pc = {}
        for c in space.cells:
            da1, db = A.dim(k + 1, c), B.dim(k, c)
            if db:
                m = RationalMatrix.zero(da1 + db, db)
                _insert(m, da1, 0, RationalMatrix.identity(db))
                ic[c] = m
            if da1:
                m = RationalMatrix.zero(da1, da1 + db)
                _insert(m, 0, 0, RationalMatrix.identity(da1))
                pc[c] = m
        incl[k] = ic
        proj[k] = pc
    incl_m = SheafMorphism(B, cone, incl, check=False)
    proj_m = SheafMorphism(cone, A.shift(1), proj, check=False)
    return cone, incl_m, proj_m


def _block2(m_a, m_b, ra, rb, ca, cb):
    out = RationalMatrix.zero(ra + rb, ca + cb)
    _insert(out, 0, 0, m_a)
    _insert(out, ra, ca, m_b)
    return out


def _insert(m, r0, c0, block):
    for i in range(block.rows):
        row = m.data[r0 + i]
        brow = block.data[i]
        for j in range(block.cols):
            if brow[j]:
                row[c0 + j] = brow[j]


# -- operations from the sheaf layer ------------------------------------------


def extension_by_zero(region, rank=1, degree=0):
    """Constant rank-r sheaf on an open or locally closed region, zero outside."""
    if region.kind not in ("open", "closed", "locally_closed"):
        raise SheafValidationError("region is not locally closed")
    space = CellSpace(region.complex)
    sheaf = CellularSheaf.supported_constant(space, region.cells, rank)
    return SheafComplex.from_sheaf(sheaf, degree)


def extend_by_zero_complex(fc, region=None):
    """Zero-extension of a sheaf complex on a sub-CellSpace to the full complex.

    The support (the space of ``fc``, intersected with ``region`` when given)
    must be locally closed in the ambient complex.
    """
    from .complexes import CellRegion

    cx = fc.space.complex
    cells = fc.space.cells if region is None else frozenset(region.cells) & fc.space.cells
    CellRegion(cx, cells, "locally_closed")  # validates
    full = CellSpace(cx)
    sheaves = {}
    for k, s in fc.sheaves.items():
        dims = {c: d for c, d in s.dims.items() if c in cells}
        rest = {}
        for f, c in full.face_pairs():
            if dims.get(f, 0) and dims.get(c, 0) and (f, c) in s.restrictions:
                rest[(f, c)] = s.restrictions[(f, c)]
        sheaves[k] = CellularSheaf(full, dims, rest)
    diffs = {}
    for k, comp in fc.differentials.items():
        diffs[k] = {c: m for c, m in comp.items() if c in cells}
    return SheafComplex(full, sheaves, diffs)


def local_system(cx, rank, edge_transports):
    """Cellular sheaf with invertible restrictions realizing edge transports.

    ``edge_transports`` maps an edge (a, b) with a < b to the invertible
    matrix transporting the fiber at a to the fiber at b; edges not listed
    get the identity.  The stalk at every cell is identified with the fiber
    at the cell's largest vertex, and restrictions are the transports along
    the direct edge between those vertices (within a simplex all paths between
    two vertices agree once every two-cell's transports commute, which is
    checked and reported otherwise).
    """
    space = CellSpace(cx)
    transports = {}
    for e, m in edge_transports.items():
        e = tuple(sorted(e))
        if e not in cx.cells or len(e) != 2:
            raise SheafValidationError("edge %r not in complex" % (e,))
        if not isinstance(m, RationalMatrix):
            m = RationalMatrix.from_rows(m)
        if m.rows != rank or m.cols != rank or m.rank() != rank:
            raise SheafValidationError("transport on %r is not invertible" % (e,))
        transports[e] = m

    def step(v, w):
        if v == w:
            return RationalMatrix.identity(rank)
        if v < w:
            return transports.get((v, w), RationalMatrix.identity(rank))
        return _inv(transports.get((w, v), RationalMatrix.identity(rank)))

    # cocycle condition around every two-cell
    for tri in cx.cells_of_dim(2):
        a, b, c = tri
        lhs = step(b, c) * step(a, b)
        if not (lhs - step(a, c)).is_zero():
            raise SheafValidationError(
                "inconsistent transports around the two-cell %r" % (tri,))

    dims = {c: rank for c in cx.cells}
    rest = {}
    for f, c in space.face_pairs():
        rest[(f, c)] = step(f[-1], c[-1])
    sheaf = CellularSheaf(space, dims, rest)
    sheaf.validate()
    return sheaf


def _inv(m):
    if m.rows != m.cols:
        raise ValueError("cannot invert a non-square matrix")
    n = m.rows
    aug = RationalMatrix.hstack([m, RationalMatrix.identity(n)])
    red, pivots = aug.rref()
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return RationalMatrix(n, n, [row[n:] for row in red.data])


# -- cohomology sheaves, stalks, local Euler characteristic ---------------------


def cohomology_sheaves(fc):
    """Stalkwise cohomology with induced restrictions, as {degree: sheaf}."""
    space = fc.space
    out = {}
    reps = {}
    for k in _cohomology_degrees(fc):
        dims = {}
        bases = {}
        for c in space.cells:
            q = _stalk_quotient_basis(fc, k, c)
            if q is None:
                continue
            kerb, imb, quot = q
            if quot:
                dims[c] = len(quot)
                bases[c] = (kerb, imb, quot)
        rest = {}
        for f, c in space.face_pairs():
            if dims.get(f, 0) and dims.get(c, 0):
                rest[(f, c)] = _induced_map(
                    fc.sheaf(k).restriction_step(f, c), bases[f], bases[c],
                    fc.dim(k, c))
        sheaf = CellularSheaf(space, dims, rest)
        if not sheaf.is_zero():
            out[k] = sheaf
            reps[k] = bases
    return out, reps


def _cohomology_degrees(fc):
    return sorted(fc.sheaves)


def _stalk_quotient_basis(fc, k, c):
    n = fc.dim(k, c)
    if n == 0:
        return None
    dk = fc.diff_at(k, c)
    dkm1 = fc.diff_at(k - 1, c)
    ker = dk.kernel_basis() if dk.rows else [
        [Fraction(1) if i == j else Fraction(0) for i in range(n)] for j in range(n)]
    im_cols = []
    if dkm1.cols:
        # pivot columns of the rref give a basis of the column space
        im_cols = [[dkm1.data[i][j] for i in range(n)] for j in _pivot_columns(dkm1)]
    # kernel vectors extending the image to a basis of the kernel
    mat = column_matrix(im_cols + ker, length=n)
    _, pivots = mat.rref()
    quot = [p - len(im_cols) for p in pivots if p >= len(im_cols)]
    return ker, im_cols, [ker[i] for i in quot]


def _pivot_columns(m):
    _, pivots = m.rref()
    return pivots


def _induced_map(rho, basis_f, basis_c, dim_c):
    ker_f, im_f, quot_f = basis_f
    ker_c, im_c, quot_c = basis_c
    # express rho(q) in the basis (im_c + quot_c) and keep the quot part
    span = column_matrix(im_c + quot_c, length=dim_c)
    cols = []
    for q in quot_f:
        v = rho.apply(q)
        x = span.solve(v)
        if x is None:
            raise SheafValidationError("induced restriction left the cycle space")
        cols.append(x[len(im_c):])
    return column_matrix(cols, length=len(quot_c)).copy() if cols else \
        RationalMatrix.zero(len(quot_c), 0)


class ConstructibleFunction:
    """Integer value per open cell; the local Euler characteristic lives here."""

    def __init__(self, complex, values=None):
        self.complex = complex
        self.values = {}
        if values:
            for c, v in values.items():
                if v:
                    self.values[c] = int(v)

    def __getitem__(self, cell):
        return self.values.get(cell, 0)

    def __add__(self, other):
        out = dict(self.values)
        for c, v in other.values.items():
            out[c] = out.get(c, 0) + v
        return ConstructibleFunction(self.complex, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, n):
        return ConstructibleFunction(self.complex, {c: n * v for c, v in self.values.items()})

    def __eq__(self, other):
        return isinstance(other, ConstructibleFunction) and self.values == other.values

    def support(self):
        return frozenset(self.values)

    def restrict(self, cells):
        cells = set(cells)
        return ConstructibleFunction(self.complex, {c: v for c, v in self.values.items() if c in cells})

    @classmethod
    def indicator(cls, complex, cells):
        return cls(complex, {c: 1 for c in cells})


def chi_local(fc, check=True):
    """Local Euler characteristic: alternating sum of stalk dimensions.

    With ``check`` the same value is recomputed through the stalkwise
    cohomology and the two must agree (they always do for a valid complex;
    the assertion guards the degree bookkeeping).
    """
    values = {}
    for c in fc.space.cells:
        v = sum((-1) ** k * fc.dim(k, c) for k in fc.degrees())
        if v:
            values[c] = v
        if check:
            w = sum((-1) ** k * d for k, d in fc.stalk_cohomology(c).items())
            if v != w:
                raise SheafValidationError("stalk Euler characteristics disagree at %r" % (c,))
    return ConstructibleFunction(fc.space.complex, values)


def tensor_complexes(F, G):
    """Cellwise tensor product, totalized over the bidegree."""
    if F.space != G.space:
        raise SheafValidationError("tensor of sheaves on different spaces")
    space = F.space
    pairs = [(p, q) for p in F.degrees() for q in G.degrees()]
    sheaves = {}
    for p, q in pairs:
        s = tensor_sheaves(F.sheaf(p), G.sheaf(q))
        n = p + q
        sheaves.setdefault(n, []).append(((p, q), s))
    out_sheaves = {}
    offsets = {}
    for n, parts in sorted(sheaves.items()):
        parts.sort(key=lambda t: t[0])
        dims = {}
        rest = {}
        offs = {}
        for c in space.cells:
            off = 0
            for key, s in parts:
                offs[(key, c)] = off
                off += s.dim(c)
            if off:
                dims[c] = off
        for f, c in space.face_pairs():
            if dims.get(f, 0) and dims.get(c, 0):
                m = RationalMatrix.zero(dims[c], dims[f])
                for key, s in parts:
                    _insert(m, offs[(key, c)], offs[(key, f)], s.restriction_step(f, c))
                rest[(f, c)] = m
        out_sheaves[n] = CellularSheaf(space, dims, rest)
        offsets[n] = offs
    diffs = {}
    for n in sorted(out_sheaves):
        if n + 1 not in out_sheaves:
            continue
        comp = {}
        for c in space.cells:
            rows = out_sheaves[n + 1].dim(c)
            cols = out_sheaves[n].dim(c)
            if not rows or not cols:
                continue
            m = RationalMatrix.zero(rows, cols)
            for p in F.degrees():
                q = n - p
                if G.dim(q, c) == 0 or F.dim(p, c) == 0:
                    continue
                # d_F tensor id
                if F.dim(p + 1, c):
                    blk = _kronecker(F.diff_at(p, c), RationalMatrix.identity(G.dim(q, c)))
                    _insert(m, offsets[n + 1][((p + 1, q), c)], offsets[n][((p, q), c)], blk)
                # (-1)^p id tensor d_G
                if G.dim(q + 1, c):
                    blk = _kronecker(RationalMatrix.identity(F.dim(p, c)), G.diff_at(q, c))
                    if p % 2:
                        blk = blk.scale(-1)
                    _insert(m, offsets[n + 1][((p, q + 1), c)], offsets[n][((p, q), c)], blk)
            comp[c] = m
        diffs[n] = comp
    return SheafComplex(space, out_sheaves, diffs)


def pullback_cells(F, source_space, cell_image):
    """Pullback along a cell-level map (stalk at c = stalk at cell_image(c)).

    Covers both honest simplicial maps and refinement maps; restrictions are
    composite restrictions between the image cells.
    """
    sheaves = {}
    for k, s in F.sheaves.items():
        dims = {}
        for c in source_space.cells:
            d = s.dim(cell_image(c))
            if d:
                dims[c] = d
        rest = {}
        for f, c in source_space.face_pairs():
            if dims.get(f, 0) and dims.get(c, 0):
                rest[(f, c)] = s.restriction(cell_image(f), cell_image(c))
        sheaves[k] = CellularSheaf(source_space, dims, rest)
    diffs = {}
    for k, comp in F.differentials.items():
        out = {}
        for c in source_space.cells:
            m = comp.get(cell_image(c))
            if m is not None:
                out[c] = m
        if out:
            diffs[k] = out
    return SheafComplex(source_space, sheaves, diffs)


def hom_space_basis(F, G):
    """Basis of the space of sheaf-complex morphisms F -> G (chain maps).

    Solved exactly as the kernel of the linear system expressing naturality
    and commutation with the differentials.  Returns a list of
    SheafMorphism.  Meant for small complexes (corpus scale).
    """
    space = F.space
    degs = sorted(set(F.degrees()) | set(G.degrees()))
    slots = []
    index = {}
    for k in degs:
        for c in space.sorted_cells():
            r, s = G.dim(k, c), F.dim(k, c)
            if r and s:
                index[(k, c)] = len(slots)
                slots.append((k, c, r, s))
    nvar = sum(r * s for (_, _, r, s) in slots)
    if nvar == 0:
        return []
    offs = []
    off = 0
    for (_, _, r, s) in slots:
        offs.append(off)
        off += r * s

    rows = []

    def add_constraint(coeffs):
        row = [Fraction(0)] * nvar
        nonzero = False
        for (slot_i, i, j, val) in coeffs:
            if val:
                k0, c0, r0, s0 = slots[slot_i]
                row[offs[slot_i] + i * s0 + j] += val
                nonzero = True
        if nonzero:
            rows.append(row)

    for k in degs:
        for f, c in space.face_pairs():
            rG, sF = G.dim(k, c), F.dim(k, f)
            if not rG or not sF:
                # one side forces the other to vanish only via explicit rows
                pass
            rho_F = F.sheaf(k).restriction_step(f, c)
            rho_G = G.sheaf(k).restriction_step(f, c)
            # rho_G . phi_f - phi_c . rho_F = 0, entrywise
            for i in range(G.dim(k, c)):
                for j in range(F.dim(k, f)):
                    coeffs = []
                    if (k, f) in index:
                        si = index[(k, f)]
                        for l in range(G.dim(k, f)):
                            coeffs.append((si, l, j, rho_G.data[i][l]))
                    if (k, c) in index:
                        si = index[(k, c)]
                        for l in range(F.dim(k, c)):
                            coeffs.append((si, i, l, -rho_F.data[l][j]))
                    add_constraint(coeffs)
        for c in space.sorted_cells():
            # d_G . phi_k - phi_{k+1} . d_F = 0
            for i in range(G.dim(k + 1, c)):
                for j in range(F.dim(k, c)):
                    coeffs = []
                    if (k, c) in index:
                        si = index[(k, c)]
                        dG = G.diff_at(k, c)
                        for l in range(G.dim(k, c)):
                            coeffs.append((si, i, l, dG.data[i][l]))
                    if (k + 1, c) in index:
                        si = index[(k + 1, c)]
                        dF = F.diff_at(k, c)
                        for l in range(F.dim(k + 1, c)):
                            coeffs.append((si, l, j, -dF.data[l][j]))
                    add_constraint(coeffs)

    if rows:
        mat = RationalMatrix.from_rows(rows)
        kernel = mat.kernel_basis()
    else:
        kernel = [[Fraction(1) if i == j else Fraction(0) for i in range(nvar)]
                  for j in range(nvar)]
    out = []
    for vec in kernel:
        comps = {}
        for slot_i, (k, c, r, s) in enumerate(slots):
            m = RationalMatrix(r, s,
                               [[vec[offs[slot_i] + i * s + j] for j in range(s)]
                                for i in range(r)])
            if not m.is_zero():
                comps.setdefault(k, {})[c] = m
        out.append(SheafMorphism(F, G, comps, check=False))
    return out
