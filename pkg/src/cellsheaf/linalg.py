"""Exact rational matrices and cohomology of bounded complexes of vector spaces.

Everything here is over the rationals, represented by ``fractions.Fraction``.
Ranks are computed by fraction-free (Bareiss) elimination on an integer copy
of the matrix obtained by clearing denominators row by row; row scaling
changes neither the rank nor the kernel.  No floating point, no modular
shortcuts.
"""

from fractions import Fraction
from math import gcd


def _lcm(a, b):
    return a // gcd(a, b) * b


class RationalMatrix:
    """Dense matrix with Fraction entries.

    The entry list is stored row-major.  Instances are treated as immutable
    by every consumer in this package; none of the methods mutate self.
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows, cols, data=None):
        self.rows = rows
        self.cols = cols
        if data is None:
            data = [[Fraction(0)] * cols for _ in range(rows)]
        self.data = data

    @classmethod
    def from_rows(cls, rows):
        rows = [[Fraction(x) for x in r] for r in rows]
        nr = len(rows)
        nc = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != nc:
                raise ValueError("ragged rows")
        return cls(nr, nc, rows)

    @classmethod
    def identity(cls, n):
        m = cls(n, n)
        for i in range(n):
            m.data[i][i] = Fraction(1)
        return m

    @classmethod
    def zero(cls, rows, cols):
        return cls(rows, cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def __eq__(self, other):
        return (
            isinstance(other, RationalMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
        )

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(tuple(r) for r in self.data)))

    def __repr__(self):
        return "RationalMatrix(%d, %d, %r)" % (self.rows, self.cols, self.data)

    def is_zero(self):
        return all(x == 0 for row in self.data for x in row)

    def copy(self):
        return RationalMatrix(self.rows, self.cols, [row[:] for row in self.data])

    def transpose(self):
        return RationalMatrix(
            self.cols, self.rows,
            [[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)],
        )

    def __add__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch in +")
        return RationalMatrix(
            self.rows, self.cols,
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.data, other.data)],
        )

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return RationalMatrix(
            self.rows, self.cols, [[-x for x in row] for row in self.data]
        )

    def scale(self, c):
        c = Fraction(c)
        return RationalMatrix(
            self.rows, self.cols, [[c * x for x in row] for row in self.data]
        )

    def __mul__(self, other):
        """Matrix product self * other (self applied after other)."""
        if self.cols != other.rows:
            raise ValueError(
                "shape mismatch in *: %dx%d times %dx%d"
                % (self.rows, self.cols, other.rows, other.cols)
            )
        ot = other.transpose().data
        out = []
        for row in self.data:
            out.append([
                sum(a * b for a, b in zip(row, col) if a and b) or Fraction(0)
                for col in ot
            ])
        return RationalMatrix(self.rows, other.cols, out)

    def apply(self, vec):
        if len(vec) != self.cols:
            raise ValueError("vector length mismatch")
        return [
            sum((a * b for a, b in zip(row, vec) if a and b), Fraction(0))
            for row in self.data
        ]

    @staticmethod
    def hstack(mats):
        mats = list(mats)
        rows = mats[0].rows
        if any(m.rows != rows for m in mats):
            raise ValueError("hstack: row mismatch")
        data = [sum((m.data[i] for m in mats), []) for i in range(rows)]
        return RationalMatrix(rows, sum(m.cols for m in mats), data)

    @staticmethod
    def vstack(mats):
        mats = list(mats)
        cols = mats[0].cols
        if any(m.cols != cols for m in mats):
            raise ValueError("vstack: col mismatch")
        data = [row[:] for m in mats for row in m.data]
        return RationalMatrix(sum(m.rows for m in mats), cols, data)

    @staticmethod
    def block(grid):
        """Assemble a matrix from a 2d grid of blocks (None = zero block).

        Row/column sizes are inferred; every row of the grid must contain at
        least one concrete block, likewise every column.
        """
        nbr = len(grid)
        nbc = len(grid[0]) if nbr else 0
        rsz = [None] * nbr
        csz = [None] * nbc
        for i in range(nbr):
            for j in range(nbc):
                b = grid[i][j]
                if b is None:
                    continue
                if rsz[i] is None:
                    rsz[i] = b.rows
                elif rsz[i] != b.rows:
                    raise ValueError("block row size mismatch")
                if csz[j] is None:
                    csz[j] = b.cols
                elif csz[j] != b.cols:
                    raise ValueError("block col size mismatch")
        if any(s is None for s in rsz) or any(s is None for s in csz):
            raise ValueError("block: cannot infer sizes (all-None row or column)")
        out = RationalMatrix(sum(rsz), sum(csz))
        r0 = 0
        for i in range(nbr):
            c0 = 0
            for j in range(nbc):
                b = grid[i][j]
                if b is not None:
                    for r in range(b.rows):
                        out.data[r0 + r][c0:c0 + b.cols] = b.data[r][:]
                c0 += csz[j]
            r0 += rsz[i]
        return out

    def _integer_rows(self):
        """Integer copy with each row scaled by the lcm of its denominators."""
        out = []
        for row in self.data:
            den = 1
            for x in row:
                if x:
                    den = _lcm(den, x.denominator)
            out.append([int(x * den) for x in row])
        return out

    def rank(self):
        """Exact rank via fraction-free Gaussian elimination over the integers."""
        m = self._integer_rows()
        nr, nc = self.rows, self.cols
        rank = 0
        prev = 1
        row = 0
        for col in range(nc):
            piv = -1
            for i in range(row, nr):
                if m[i][col]:
                    piv = i
                    break
            if piv < 0:
                continue
            if piv != row:
                m[row], m[piv] = m[piv], m[row]
            p = m[row][col]
            for i in range(row + 1, nr):
                mi = m[i]
                f = mi[col]
                if f or True:
                    mr = m[row]
                    for j in range(col + 1, nc):
                        mi[j] = (mi[j] * p - f * mr[j]) // prev
                mi[col] = 0
            prev = p
            row += 1
            rank += 1
            if row == nr:
                break
        return rank

    def rref(self):
        """Reduced row echelon form over Fraction; returns (matrix, pivot cols)."""
        m = [row[:] for row in self.data]
        nr, nc = self.rows, self.cols
        pivots = []
        row = 0
        for col in range(nc):
            piv = -1
            for i in range(row, nr):
                if m[i][col]:
                    piv = i
                    break
            if piv < 0:
                continue
            m[row], m[piv] = m[piv], m[row]
            p = m[row][col]
            m[row] = [x / p for x in m[row]]
            for i in range(nr):
                if i != row and m[i][col]:
                    f = m[i][col]
                    m[i] = [a - f * b for a, b in zip(m[i], m[row])]
            pivots.append(col)
            row += 1
            if row == nr:
                break
        return RationalMatrix(nr, nc, m), pivots

    def kernel_basis(self):
        """Basis of the right kernel, as a list of length-cols Fraction vectors."""
        red, pivots = self.rref()
        free = [j for j in range(self.cols) if j not in pivots]
        basis = []
        for f in free:
            v = [Fraction(0)] * self.cols
            v[f] = Fraction(1)
            for i, p in enumerate(pivots):
                v[p] = -red.data[i][f]
            basis.append(v)
        return basis

    def solve(self, target):
        """One exact solution x of self * x = target, or None if inconsistent."""
        aug = RationalMatrix.hstack([self, RationalMatrix(self.rows, 1, [[Fraction(t)] for t in target])])
        red, pivots = aug.rref()
        if self.cols in pivots:
            return None
        x = [Fraction(0)] * self.cols
        for i, p in enumerate(pivots):
            x[p] = red.data[i][self.cols]
        return x


def column_matrix(vectors, length=None):
    """Matrix whose columns are the given vectors (length needed when empty)."""
    if not vectors:
        if length is None:
            raise ValueError("column_matrix needs a length for the empty family")
        return RationalMatrix(length, 0)
    n = len(vectors[0])
    return RationalMatrix(n, len(vectors), [[Fraction(v[i]) for v in vectors] for i in range(n)])


class SpaceComplex:
    """Bounded cochain complex of finite-dimensional rational spaces.

    ``dims`` maps degree -> dimension; ``diffs`` maps degree k to the matrix
    of d_k : C^k -> C^{k+1} (shape dims[k+1] x dims[k]).  Degrees absent from
    ``dims`` are zero.
    """

    def __init__(self, dims, diffs, check=True):
        self.dims = {k: d for k, d in dims.items() if d}
        self.diffs = {}
        for k, m in diffs.items():
            if m is None:
                continue
            if m.rows != self.dim(k + 1) or m.cols != self.dim(k):
                raise ValueError("differential shape mismatch at degree %d" % k)
            if m.rows and m.cols:
                self.diffs[k] = m
        if check:
            self.check_complex()

    def dim(self, k):
        return self.dims.get(k, 0)

    def degrees(self):
        return sorted(self.dims)

    def diff(self, k):
        m = self.diffs.get(k)
        if m is None:
            return RationalMatrix.zero(self.dim(k + 1), self.dim(k))
        return m

    def check_complex(self):
        for k in list(self.diffs):
            if k + 1 in self.diffs:
                if not (self.diff(k + 1) * self.diff(k)).is_zero():
                    raise ValueError("d o d != 0 at degree %d" % k)

    def cohomology(self):
        """Graded dimensions of cohomology, as {degree: dim}, zeros omitted."""
        out = {}
        ranks = {k: (self.diffs[k].rank() if k in self.diffs else 0)
                 for k in set(self.diffs)}
        for k in self.degrees():
            rk = ranks.get(k, 0)
            rkm1 = ranks.get(k - 1, 0)
            h = self.dim(k) - rk - rkm1
            if h:
                out[k] = h
        return out

    def euler(self):
        return sum((-1) ** k * d for k, d in self.dims.items())

    def shift(self, n):
        """Degree shift: result^k = self^{k+n}, differentials times (-1)^n."""
        dims = {k - n: d for k, d in self.dims.items()}
        sign = -1 if n % 2 else 1
        diffs = {k - n: (m.scale(sign) if sign < 0 else m) for k, m in self.diffs.items()}
        return SpaceComplex(dims, diffs, check=False)

    def total_dim(self):
        return sum(self.dims.values())


class SpaceMap:
    """Degreewise map of space complexes commuting with the differentials."""

    def __init__(self, src, dst, mats, check=True):
        self.src = src
        self.dst = dst
        self.mats = {}
        for k, m in mats.items():
            if m.rows != dst.dim(k) or m.cols != src.dim(k):
                raise ValueError("component shape mismatch at degree %d" % k)
            if m.rows and m.cols:
                self.mats[k] = m
        if check:
            self.check_chain_map()

    def mat(self, k):
        m = self.mats.get(k)
        if m is None:
            return RationalMatrix.zero(self.dst.dim(k), self.src.dim(k))
        return m

    def check_chain_map(self):
        for k in set(self.src.dims) | set(self.dst.dims):
            lhs = self.dst.diff(k) * self.mat(k)
            rhs = self.mat(k + 1) * self.src.diff(k)
            if not (lhs - rhs).is_zero():
                raise ValueError("not a chain map at degree %d" % k)


def cone(f):
    """Mapping cone of a SpaceMap f : A -> B.

    cone^k = A^{k+1} (+) B^k with differential [[-dA, 0], [f, dB]].
    Returns (cone complex, offsets) where offsets[k] = dim A^{k+1}, the start
    of the B-part in degree k.
    """
    A, B = f.src, f.dst
    degs = set()
    for k in A.dims:
        degs.add(k - 1)
    degs |= set(B.dims)
    dims = {k: A.dim(k + 1) + B.dim(k) for k in degs}
    diffs = {}
    for k in sorted(degs):
        grid = [
            [_pad(-A.diff(k + 1), A.dim(k + 2), A.dim(k + 1)), RationalMatrix.zero(A.dim(k + 2), B.dim(k))],
            [_pad(f.mat(k + 1), B.dim(k + 1), A.dim(k + 1)), _pad(B.diff(k), B.dim(k + 1), B.dim(k))],
        ]
        m = RationalMatrix.block(grid)
        diffs[k] = m
    offsets = {k: A.dim(k + 1) for k in degs}
    return SpaceComplex(dims, diffs), offsets


def _pad(m, rows, cols):
    if m.rows == rows and m.cols == cols:
        return m
    out = RationalMatrix.zero(rows, cols)
    for i in range(min(rows, m.rows)):
        out.data[i][: m.cols] = m.data[i][:]
    return out


def cone_map(f1, f2, g_src, g_dst):
    """Map of cones induced by a commuting square.

    Given f1 : A1 -> B1, f2 : A2 -> B2 and a square g_src : A1 -> A2,
    g_dst : B1 -> B2 with f2 g_src = g_dst f1, return the induced
    SpaceMap cone(f1) -> cone(f2).
    """
    c1, _ = cone(f1)
    c2, _ = cone(f2)
    mats = {}
    for k in set(c1.dims) | set(c2.dims):
        grid = [
            [_pad(g_src.mat(k + 1), f2.src.dim(k + 1), f1.src.dim(k + 1)),
             RationalMatrix.zero(f2.src.dim(k + 1), f1.dst.dim(k))],
            [RationalMatrix.zero(f2.dst.dim(k), f1.src.dim(k + 1)),
             _pad(g_dst.mat(k), f2.dst.dim(k), f1.dst.dim(k))],
        ]
        mats[k] = RationalMatrix.block(grid)
    return SpaceMap(c1, c2, mats)


def total_complex(dims, horiz, vert):
    """Totalize a bounded double complex with commuting squares.

    ``dims`` maps (p, q) -> dimension, ``horiz`` maps (p, q) to the matrix of
    the map (p, q) -> (p+1, q) and ``vert`` to (p, q) -> (p, q+1).  The sign
    (-1)^p is applied to the vertical maps here, so the inputs commute and
    the output squares anticommute.  Returns (SpaceComplex, index) where
    index[(p, q)] = (total degree, offset).
    """
    for (p, q) in dims:
        h = horiz.get((p, q))
        v = vert.get((p, q))
        hv = vert.get((p + 1, q))
        vh = horiz.get((p, q + 1))
        a = _compose_opt(hv, h, dims, (p, q), (p + 1, q), (p + 1, q + 1))
        b = _compose_opt(vh, v, dims, (p, q), (p, q + 1), (p + 1, q + 1))
        if a is not None and b is not None and not (a - b).is_zero():
            raise ValueError("double complex squares do not commute at %r" % ((p, q),))
    degkeys = {}
    for (p, q), d in dims.items():
        if d:
            degkeys.setdefault(p + q, []).append((p, q))
    for n in degkeys:
        degkeys[n].sort()
    index = {}
    tdims = {}
    for n, keys in degkeys.items():
        off = 0
        for key in keys:
            index[key] = (n, off)
            off += dims[key]
        tdims[n] = off
    tdiffs = {}
    for n in sorted(tdims):
        if n + 1 not in tdims:
            continue
        m = RationalMatrix.zero(tdims[n + 1], tdims[n])
        for (p, q) in degkeys.get(n, []):
            src_off = index[(p, q)][1]
            h = horiz.get((p, q))
            if h is not None and dims.get((p + 1, q)):
                _insert_block(m, index[(p + 1, q)][1], src_off, h)
            v = vert.get((p, q))
            if v is not None and dims.get((p, q + 1)):
                vm = v.scale(-1) if p % 2 else v
                _insert_block(m, index[(p, q + 1)][1], src_off, vm)
        tdiffs[n] = m
    return SpaceComplex(tdims, tdiffs), index


def _insert_block(m, r0, c0, block):
    for i in range(block.rows):
        row = m.data[r0 + i]
        brow = block.data[i]
        for j in range(block.cols):
            if brow[j]:
                row[c0 + j] = brow[j]


def _compose_opt(second, first, dims, src, mid, dst):
    if not dims.get(src) or not dims.get(dst):
        return None
    if not dims.get(mid):
        return RationalMatrix.zero(dims[dst], dims[src])
    if second is None or first is None:
        return RationalMatrix.zero(dims[dst], dims[src])
    return second * first


def feasible_strict(strict_rows, eq_rows=None):
    """Exact witness for a homogeneous system A y > 0 (componentwise), E y = 0.

    ``strict_rows`` is a list of rational row vectors; returns a Fraction
    vector y with every inner product strictly positive and every equality
    row orthogonal to y, or None when the system is infeasible.  Uses
    Fourier-Motzkin elimination, which is exact over the rationals and fine
    at the dimensions that arise here (<= 8 or so).
    """
    strict_rows = [[Fraction(x) for x in r] for r in strict_rows]
    if not strict_rows:
        dim0 = len(eq_rows[0]) if eq_rows else 0
        return [Fraction(0)] * dim0
    dim = len(strict_rows[0])
    if any(all(x == 0 for x in r) for r in strict_rows):
        return None
    if eq_rows:
        eq = RationalMatrix.from_rows(eq_rows)
        basis = eq.kernel_basis()
        if not basis:
            return None
        proj = [[sum(r[i] * b[i] for i in range(dim)) for b in basis] for r in strict_rows]
        y = feasible_strict(proj)
        if y is None:
            return None
        out = [Fraction(0)] * dim
        for coef, b in zip(y, basis):
            for i in range(dim):
                out[i] += coef * b[i]
        return out
    # rows of the form a . y > 0; eliminate variables back to front
    rows = [r for r in strict_rows]
    stages = []
    for var in range(dim - 1, 0, -1):
        pos, neg, zero = [], [], []
        for r in rows:
            c = r[var]
            if c > 0:
                pos.append(r)
            elif c < 0:
                neg.append(r)
            else:
                zero.append(r)
        stages.append((var, pos, neg))
        new_rows = [r[:var] for r in zero]
        for rp in pos:
            for rn in neg:
                # eliminate y_var from A y_var + rp'.y' > 0 (A > 0) and
                # B y_var + rn'.y' > 0 (B < 0): the shadow is A rn' - B rp' > 0
                comb = [rp[var] * rn[j] - rn[var] * rp[j] for j in range(var)]
                new_rows.append(comb)
        rows = new_rows
        if any(all(x == 0 for x in r) for r in rows):
            return None
    # one variable left: rows are [a] with a*y0 > 0
    lo_pos = [r[0] for r in rows if r[0] > 0]
    lo_neg = [r[0] for r in rows if r[0] < 0]
    if any(r[0] == 0 for r in rows):
        return None
    if lo_pos and lo_neg:
        return None
    if lo_neg:
        y = [Fraction(-1)]
    else:
        y = [Fraction(1)]
    # back-substitute through the stages
    for var, pos, neg in reversed(stages):
        lo = None  # y_var must exceed lo
        hi = None  # y_var must be below hi
        for rp in pos:
            val = -sum(rp[j] * y[j] for j in range(var)) / rp[var]
            lo = val if lo is None or val > lo else lo
        for rn in neg:
            val = -sum(rn[j] * y[j] for j in range(var)) / rn[var]
            hi = val if hi is None or val < hi else hi
        if lo is None and hi is None:
            yv = Fraction(1)
        elif lo is None:
            yv = hi - 1
        elif hi is None:
            yv = lo + 1
        else:
            if not lo < hi:
                return None
            yv = (lo + hi) / 2
        y = y + [yv]
    return y
