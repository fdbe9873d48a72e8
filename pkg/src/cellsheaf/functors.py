"""Derived functors for cellular sheaves: sections, images, duality, ext.

Injective resolutions use the canonical embedding of a sheaf G into the sum,
over all cells s, of the constant sheaf on the closed cell s tensored with
the stalk G(s); iterating on cokernels terminates within (dimension + 1)
steps because each cokernel is supported strictly below the previous top
dimension.  For complexes the construction is applied termwise and the
resulting double complex is totalized.

Sections of an elementary injective over an open cell set are a single copy
of its coefficient space (the closed cell meets the open set in a connected,
star-shaped union of cells), which is what makes every functor here a finite
exact-rational computation.
"""

from fractions import Fraction

from .linalg import (RationalMatrix, SpaceComplex, SpaceMap, cone, cone_map,
                     column_matrix)
from .complexes import CellRegion, faces_of
from .sheaves import (CellSpace, CellularSheaf, SheafComplex, SheafMorphism,
                      SheafValidationError, extend_by_zero_complex,
                      pullback_cells, _insert)


class ResolutionError(RuntimeError):
    pass


# -- the canonical step -------------------------------------------------------


def _quotient_sheaf(G):
    """T(G)/G with stalks indexed by proper cofaces, plus projection matrices."""
    space = G.space
    dims = {}
    offsets = {}
    for c in space.cells:
        off = 0
        offs = {}
        for s in space.cofaces_all(c):
            if s != c and G.dim(s):
                offs[s] = off
                off += G.dim(s)
        if off:
            dims[c] = off
            offsets[c] = offs
    rest = {}
    for f, c in space.face_pairs():
        if dims.get(f, 0) and dims.get(c, 0):
            mat = RationalMatrix.zero(dims[c], dims[f])
            for s, off_c in offsets[c].items():
                _insert(mat, off_c, offsets[f][s], RationalMatrix.identity(G.dim(s)))
                if G.dim(c):
                    _insert(mat, off_c, offsets[f][c], G.restriction(c, s).scale(-1))
        # note: if c itself has zero stalk the correction term vanishes
            rest[(f, c)] = mat
    return CellularSheaf(space, dims, rest), offsets


class InjectiveComplex:
    """Complex of direct sums of elementary injectives, with bookkeeping.

    ``summands[n]`` lists (q, s, mult): in total degree n, the resolution row
    q contributes mult copies of the constant sheaf on the closed cell s
    (coming from internal degree p = n - q).  ``complex`` is the underlying
    SheafComplex, ``augmentation`` the quasi-isomorphism from the source.
    """

    def __init__(self, space, summands, complex, augmentation, source):
        self.space = space
        self.summands = summands
        self.complex = complex
        self.augmentation = augmentation
        self.source = source
        self._offsets_cache = {}

    def degrees(self):
        return sorted(self.summands)

    def stalk_offsets(self, n, c):
        """Offsets of the (q, s) blocks inside the degree-n stalk at cell c."""
        key = (n, c)
        got = self._offsets_cache.get(key)
        if got is None:
            off = 0
            got = {}
            cset = set(c)
            for (q, s, m) in self.summands.get(n, []):
                if cset <= set(s):
                    got[(q, s)] = off
                    off += m
            self._offsets_cache[key] = got
        return got

    def sections_dims(self, n, open_cells):
        return [
            (q, s, m) for (q, s, m) in self.summands.get(n, [])
            if any(set(f) <= set(s) for f in _faces_in(s, open_cells))
        ]

    def sections_complex(self, open_cells, with_summands=False):
        """Space complex of sections over a coface-closed cell set."""
        open_cells = frozenset(open_cells)
        degs = self.degrees()
        chosen = {}
        dims = {}
        for n in degs:
            lst = []
            for (q, s, m) in self.summands.get(n, []):
                ev = _eval_cell(s, open_cells)
                if ev is not None:
                    lst.append((q, s, m, ev))
            chosen[n] = lst
            dims[n] = sum(m for (_, _, m, _) in lst)
        diffs = {}
        for n in degs:
            if n + 1 not in dims or not dims[n] or not dims.get(n + 1):
                continue
            mat = RationalMatrix.zero(dims[n + 1], dims[n])
            roff = 0
            for (q2, s2, m2, ev) in chosen[n + 1]:
                d_ev = self.complex.diff_at(n, ev)
                row_off_in_stalk = self.stalk_offsets(n + 1, ev)[(q2, s2)]
                src_offs = self.stalk_offsets(n, ev)
                coff = 0
                for (q1, s1, m1, _) in chosen[n]:
                    if (q1, s1) in src_offs:
                        so = src_offs[(q1, s1)]
                        block = RationalMatrix(
                            m2, m1,
                            [row[so:so + m1] for row in
                             d_ev.data[row_off_in_stalk:row_off_in_stalk + m2]])
                        _insert(mat, roff, coff, block)
                    coff += m1
                roff += m2
            diffs[n] = mat
        sc = SpaceComplex(dims, diffs, check=False)
        if with_summands:
            return sc, chosen
        return sc

    def sections_restriction(self, chosen_big, chosen_small, sc_big, sc_small):
        """Restriction of sections between two open sets, as a SpaceMap."""
        mats = {}
        for n, small in chosen_small.items():
            big = chosen_big.get(n, [])
            if not small or not big:
                continue
            mat = RationalMatrix.zero(sum(m for (_, _, m, _) in small),
                                      sum(m for (_, _, m, _) in big))
            big_off = {}
            off = 0
            for (q, s, m, _) in big:
                big_off[(q, s)] = off
                off += m
            roff = 0
            for (q, s, m, _) in small:
                _insert(mat, roff, big_off[(q, s)], RationalMatrix.identity(m))
                roff += m
            mats[n] = mat
        return SpaceMap(sc_big, sc_small, mats, check=False)


def _faces_in(cell, cells):
    return [f for f in faces_of(cell) if f in cells]


def _eval_cell(s, open_cells):
    """Lowest-dimensional face of s inside the open set (None if disjoint)."""
    best = None
    for f in faces_of(s):
        if f in open_cells and (best is None or len(f) < len(best) or
                                (len(f) == len(best) and f < best)):
            best = f
    return best


def injective_resolution(F, check=True):
    """Canonical injective resolution of a sheaf complex.

    Rows: Q_0 = F, J_q = T(Q_q), Q_{q+1} = J_q / Q_q; the total complex of
    the J rows (with the sign (-1)^p on the row-to-row maps) is the
    resolution, augmented by the canonical embedding of F.  With ``check``
    the stalkwise cohomology of the result is compared against the source.
    """
    space = F.space
    max_rows = (max((len(c) for c in space.cells), default=1) - 1) + 2
    q_rows = []      # per q: the complex Q_q
    Q = F
    q = 0
    while not Q.is_zero():
        if q > max_rows:
            raise ResolutionError("resolution did not terminate within the bound")
        q_rows.append(Q)
        Q = _next_cokernel(Q)
        q += 1

    summands = {}
    for qi, Qq in enumerate(q_rows):
        for p in Qq.degrees():
            n = p + qi
            lst = summands.setdefault(n, [])
            for s in space.sorted_cells():
                m = Qq.dim(p, s)
                if m:
                    lst.append((qi, s, m))
    for n in summands:
        summands[n].sort(key=lambda t: (t[0], len(t[1]), t[1]))

    # assemble the underlying sheaf complex
    sheaves = {}
    offsets = {}   # (n, c) -> {(q, s): offset}
    for n, lst in summands.items():
        dims = {}
        offs_all = {}
        for c in space.cells:
            cset = set(c)
            off = 0
            offs = {}
            for (qi, s, m) in lst:
                if cset <= set(s):
                    offs[(qi, s)] = off
                    off += m
            if off:
                dims[c] = off
                offs_all[c] = offs
        rest = {}
        for f, c in space.face_pairs():
            if dims.get(f, 0) and dims.get(c, 0):
                mat = RationalMatrix.zero(dims[c], dims[f])
                for key, off_c in offs_all[c].items():
                    qi, s = key
                    m = _summand_mult(summands[n], qi, s)
                    _insert(mat, off_c, offs_all[f][key], RationalMatrix.identity(m))
                rest[(f, c)] = mat
        sheaves[n] = CellularSheaf(space, dims, rest)
        for c, offs in offs_all.items():
            offsets[(n, c)] = offs

    diffs = {}
    for n in sorted(summands):
        comp = {}
        for c in space.cells:
            rows_dim = sheaves[n + 1].dim(c) if n + 1 in sheaves else 0
            cols_dim = sheaves[n].dim(c)
            if not rows_dim or not cols_dim:
                continue
            mat = RationalMatrix.zero(rows_dim, cols_dim)
            src_offs = offsets[(n, c)]
            dst_offs = offsets[(n + 1, c)]
            for (qi, s), coff in src_offs.items():
                p = n - qi
                Qq = q_rows[qi]
                m = Qq.dim(p, s)
                # horizontal: T(d_Q): blockwise d at the summand cell
                key_h = (qi, s)
                if key_h in dst_offs and Qq.dim(p + 1, s):
                    _insert(mat, dst_offs[key_h], coff, Qq.diff_at(p, s))
                # vertical: embed the cokernel class, sign (-1)^p
                if qi + 1 < len(q_rows):
                    Qn = q_rows[qi + 1]
                    # pi_c then rho within Q_{q+1} to each summand cell t >= c
                    for t in space.cofaces_all(c):
                        key_v = (qi + 1, t)
                        if key_v not in dst_offs:
                            continue
                        blk = _vertical_block(Qq, Qn, p, c, s, t)
                        if blk is not None and not blk.is_zero():
                            if p % 2:
                                blk = blk.scale(-1)
                            _insert(mat, dst_offs[key_v], coff, blk)
            comp[c] = mat
        if comp:
            diffs[n] = comp

    icx = SheafComplex(space, sheaves, diffs)

    # augmentation F -> I (into the q = 0 row)
    aug = {}
    for p in F.degrees():
        comp = {}
        for c in space.cells:
            if not F.dim(p, c) or not icx.dim(p, c):
                continue
            mat = RationalMatrix.zero(icx.dim(p, c), F.dim(p, c))
            offs = offsets[(p, c)]
            for (qi, s), off in offs.items():
                if qi == 0:
                    _insert(mat, off, 0, F.sheaf(p).restriction(c, s))
            comp[c] = mat
        aug[p] = comp
    augmentation = SheafMorphism(F, icx, aug, check=False)

    out = InjectiveComplex(space, summands, icx, augmentation, F)
    if check:
        _check_quasi_iso(F, icx)
    return out


def _summand_mult(lst, qi, s):
    for (q, t, m) in lst:
        if q == qi and t == s:
            return m
    raise KeyError


def _vertical_block(Qq, Qn, p, c, s, t):
    """Block of the row-to-row map from the (s) summand at stalk c into the
    degree-p part of the next row's (t) summand.

    The map is: project J_q(c) onto the cokernel Q_{q+1}(c) (subtract the
    image of the c-block through the restriction), then restrict within
    Q_{q+1} from c to t, where Q_{q+1}(c) has one block per proper coface of
    c.  Both steps are block-sparse; this returns the single (t-summand,
    s-summand) block of the composite.
    """
    # Q_{q+1}(x) = sum over proper cofaces y > x of Q_q^*(y); its restriction
    # from c to t sends block y to block y (identity) minus the correction
    # through the t-block.  Composite from J_q(c)'s s-block:
    #   pi_c: s-block goes to (s > c ? s-block : 0) minus rho_{c->y}(x_c) terms.
    m_src = Qq.dim(p, s)
    # pi_c sends (x_y)_{y>=c} to (x_y - rho_{c,y} x_c)_{y>c}; the composite
    # restriction in the cokernel from c to t only corrects through the
    # t-block, so the z-block of the image depends on x_z, x_t and x_c alone.
    dims_t = [(z, Qq.dim(p, z)) for z in Qq.space.cofaces_all(t) if z != t and Qq.dim(p, z)]
    rows = sum(m for _, m in dims_t)
    if not rows or not m_src:
        return None
    out = RationalMatrix.zero(rows, m_src)
    roff = 0
    for z, m in dims_t:
        blk = _pi_then_restrict_entry(Qq, p, c, s, t, z)
        if blk is not None:
            _insert(out, roff, 0, blk)
        roff += m
    return out


def _pi_then_restrict_entry(Qq, p, c, s, t, z):
    """Entry (z-block of Q_{q+1}(t)) <- (s-block of J_q(c)) of the vertical map.

    Derivation: pi_c sends (x_y)_{y >= c} to (x_y - rho_{c,y} x_c)_{y > c};
    the Q_{q+1}-restriction from c to t sends (w_y)_{y > c} to
    (w_z - rho_{t,z} w_t)_{z > t}.  Composing and keeping the dependence on
    the single block x_s gives four cases.
    """
    term = None
    # w_z depends on x_s: [s == z] - [s == c] rho_{c,z}
    if s == z:
        term = RationalMatrix.identity(Qq.dim(p, s))
    if s == c:
        add = Qq.sheaf(p).restriction(c, z).scale(-1)
        term = add if term is None else term + add
    # minus rho_{t,z} w_t, where w_t depends on x_s: [s == t] - [s == c] rho_{c,t}
    if s == t:
        add = Qq.sheaf(p).restriction(t, z).scale(-1)
        term = add if term is None else term + add
    if s == c:
        add = Qq.sheaf(p).restriction(t, z) * Qq.sheaf(p).restriction(c, t)
        term = add if term is None else term + add
    return term


def _next_cokernel(Q):
    """The cokernel complex T(Q)/Q, with blocks indexed by proper cofaces."""
    space = Q.space
    sheaves = {}
    offsets = {}
    for p in Q.degrees():
        sheaf, offs = _quotient_sheaf(Q.sheaf(p))
        if not sheaf.is_zero():
            sheaves[p] = sheaf
            offsets[p] = offs
    diffs = {}
    for p in Q.degrees():
        if p not in sheaves or (p + 1) not in sheaves:
            continue
        comp = {}
        for c in space.cells:
            if not sheaves[p].dim(c) or not sheaves[p + 1].dim(c):
                continue
            mat = RationalMatrix.zero(sheaves[p + 1].dim(c), sheaves[p].dim(c))
            for s, off_c in offsets[p][c].items():
                if s in offsets[p + 1].get(c, {}):
                    _insert(mat, offsets[p + 1][c][s], off_c, Q.diff_at(p, s))
            comp[c] = mat
        if comp:
            diffs[p] = comp
    return SheafComplex(space, sheaves, diffs)


def _check_quasi_iso(F, I):
    for c in F.space.cells:
        if F.stalk_cohomology(c) != I.stalk_cohomology(c):
            raise ResolutionError(
                "resolution is not stalkwise quasi-isomorphic at %r" % (c,))


# -- sections and global cohomology -------------------------------------------


def sections_complex_generic(F, open_cells):
    """Degreewise limit of stalks over the face poset of an open cell set.

    The limit is the kernel of the difference-of-restrictions matrix.  This
    computes honest (underived) sections for any sheaf complex; applied to a
    complex of injectives it computes derived sections.  Kept as the
    independent slow route; `InjectiveComplex.sections_complex` is the
    block-sparse evaluation of the same functor.
    """
    open_cells = frozenset(open_cells)
    space = F.space
    cells = sorted((c for c in open_cells), key=lambda c: (len(c), c))
    pairs = [(f, c) for (f, c) in space.face_pairs() if f in open_cells and c in open_cells]
    bases = {}
    dims = {}
    for k in F.degrees():
        offs = {}
        off = 0
        for c in cells:
            offs[c] = off
            off += F.dim(k, c)
        rows = []
        nvar = off
        mat_rows = []
        for (f, c) in pairs:
            if not F.dim(k, c) and not F.dim(k, f):
                continue
            block = RationalMatrix.zero(F.dim(k, c), nvar)
            rho = F.sheaf(k).restriction_step(f, c)
            _insert(block, 0, offs[f], rho)
            _insert(block, 0, offs[c], RationalMatrix.identity(F.dim(k, c)).scale(-1))
            mat_rows.extend(block.data)
        if mat_rows:
            basis = RationalMatrix(len(mat_rows), nvar, mat_rows).kernel_basis()
        else:
            basis = [[Fraction(1) if i == j else Fraction(0) for i in range(nvar)]
                     for j in range(nvar)]
        bases[k] = (basis, offs, nvar)
        dims[k] = len(basis)
    diffs = {}
    for k in F.degrees():
        if k + 1 not in dims or not dims[k] or not dims.get(k + 1, 0):
            continue
        basis, offs, nvar = bases[k]
        basis2, offs2, nvar2 = bases[k + 1]
        span = column_matrix(basis2, length=nvar2)
        cols = []
        for v in basis:
            img = [Fraction(0)] * nvar2
            for c in cells:
                if not F.dim(k, c):
                    continue
                piece = F.diff_at(k, c).apply(v[offs[c]:offs[c] + F.dim(k, c)])
                for i, x in enumerate(piece):
                    img[offs2[c] + i] = x
            x = span.solve(img)
            if x is None:
                raise SheafValidationError("sections differential left the limit")
            cols.append(x)
        diffs[k] = column_matrix(cols, length=dims[k + 1])
    return SpaceComplex(dims, diffs, check=False)


def derived_sections(F, region=None, check=True):
    """Graded dimensions of the derived sections over an open region.

    Restricts to the region, resolves injectively there, and takes the
    cohomology of the sections of the resolution (the limit of stalks over
    the region's face poset, evaluated block by block on the elementary
    summands).
    """
    cells = _region_cells(F, region, want_open=True)
    G = F.restrict(cells) if frozenset(cells) != F.space.cells else F
    if G.is_zero():
        return {}
    I = injective_resolution(G, check=check)
    sc = I.sections_complex(cells)
    return sc.cohomology()


def _region_cells(F, region, want_open):
    if region is None:
        cells = F.space.cells
        if want_open and not F.space.is_open():
            raise SheafValidationError("the sheaf's space is not open in its complex")
        return cells
    cells = frozenset(region.cells if isinstance(region, CellRegion) else region)
    if want_open:
        sub = CellSpace(F.space.complex, cells)
        if not sub.is_open():
            raise SheafValidationError("region is not open (coface-closed)")
    return cells & F.space.cells


def derived_sections_compact(F, region=None, check=True):
    """Compactly supported cohomology: global sections of the zero-extension."""
    cells = frozenset(F.space.cells if region is None else region.cells) & F.space.cells
    ext = extend_by_zero_complex(F.restrict(cells) if cells != F.space.cells else F)
    return derived_sections(ext, None, check=check)


def cochain_euler_compact(F, region=None):
    """Alternating cellwise sum: the Euler characteristic of H_c, cheaply."""
    cells = F.space.cells if region is None else frozenset(region.cells) & F.space.cells
    total = 0
    for c in cells:
        total += (-1) ** (len(c) - 1) * sum(
            (-1) ** k * F.dim(k, c) for k in F.degrees())
    return total


# -- inverse and direct images -------------------------------------------------


def pullback(f, G):
    """Inverse image along a simplicial map: stalk at c is the stalk at f(c)."""
    space = CellSpace(f.source)
    return pullback_cells(G, space, f.image)


def pullback_refinement(cmap, G):
    """Inverse image along a refinement map (subdivision)."""
    space = CellSpace(cmap.source)
    return pullback_cells(G, space, cmap.image)


def pushforward_derived(f, F, check=True):
    """Right derived direct image along a simplicial map."""
    I = injective_resolution(F, check=check)
    opens = {}
    for tau in f.target.cells:
        tset = set(tau)
        opens[tau] = frozenset(
            c for c in f.source.cells if tset <= set(f.image(c)))
    return _sheaf_from_sections(I, CellSpace(f.target), opens)


def pushforward_open_region(region, F, check=True):
    """Derived direct image along the inclusion of an open region.

    ``F`` is a sheaf complex on the region (a sub-CellSpace of the ambient
    complex); the value on a cell of the ambient complex is the derived
    sections over the intersection of its open star with the region.
    """
    cx = region.complex
    cells = frozenset(region.cells)
    if not CellSpace(cx, cells).is_open():
        raise SheafValidationError("pushforward region is not open")
    G = F.restrict(cells & F.space.cells)
    I = injective_resolution(G, check=check)
    opens = {}
    for tau in cx.cells:
        tset = set(tau)
        opens[tau] = frozenset(c for c in cells if tset <= set(c))
    return _sheaf_from_sections(I, CellSpace(cx), opens)


def _sheaf_from_sections(I, target_space, opens):
    data = {}
    for tau, cells in opens.items():
        sc, chosen = I.sections_complex(cells, with_summands=True)
        data[tau] = (sc, chosen)
    degs = sorted({n for (sc, _) in data.values() for n in sc.dims})
    sheaves = {}
    for n in degs:
        dims = {tau: data[tau][0].dim(n) for tau in target_space.cells
                if data[tau][0].dim(n)}
        rest = {}
        for f, c in target_space.face_pairs():
            if dims.get(f, 0) and dims.get(c, 0):
                big = data[f][1].get(n, [])
                small = data[c][1].get(n, [])
                mat = RationalMatrix.zero(dims[c], dims[f])
                boff = {}
                off = 0
                for (q, s, m, _) in big:
                    boff[(q, s)] = off
                    off += m
                roff = 0
                for (q, s, m, _) in small:
                    _insert(mat, roff, boff[(q, s)], RationalMatrix.identity(m))
                    roff += m
                rest[(f, c)] = mat
        sheaves[n] = CellularSheaf(target_space, dims, rest)
    diffs = {}
    for n in degs:
        comp = {}
        for tau in target_space.cells:
            sc = data[tau][0]
            if sc.dim(n) and sc.dim(n + 1):
                comp[tau] = sc.diff(n)
        if comp:
            diffs[n] = comp
    return SheafComplex(target_space, sheaves, diffs)


# -- Verdier duality ------------------------------------------------------------


def verdier_dual(F):
    """Combinatorial Verdier dual on the sheaf's space.

    The stalk at a cell is the linear dual of the compactly supported
    sections over its open star: one block per pair (coface t, internal
    degree p), placed in degree -(dim t + p).  Differentials are transposed
    restriction maps weighted by incidence signs together with transposed
    internal differentials weighted by (-1)^{dim t}; restriction maps of the
    dual are the block projections.
    """
    space = F.space
    blocks = {}   # m -> ordered list of (t, p, mult)
    for t in space.sorted_cells():
        for p in F.degrees():
            d = F.dim(p, t)
            if d:
                m = -(len(t) - 1 + p)
                blocks.setdefault(m, []).append((t, p, d))
    for m in blocks:
        blocks[m].sort(key=lambda x: (len(x[0]), x[0], x[1]))
    sheaves = {}
    offsets = {}
    for m, lst in blocks.items():
        dims = {}
        offs_all = {}
        for c in space.cells:
            cset = set(c)
            off = 0
            offs = {}
            for (t, p, d) in lst:
                if cset <= set(t):
                    offs[(t, p)] = off
                    off += d
            if off:
                dims[c] = off
                offs_all[c] = offs
        rest = {}
        for f, c in space.face_pairs():
            if dims.get(f, 0) and dims.get(c, 0):
                mat = RationalMatrix.zero(dims[c], dims[f])
                for (t, p), off_c in offs_all[c].items():
                    _insert(mat, off_c, offs_all[f][(t, p)],
                            RationalMatrix.identity(F.dim(p, t)))
                rest[(f, c)] = mat
        sheaves[m] = CellularSheaf(space, dims, rest)
        offsets[m] = offs_all
    diffs = {}
    cx = space.complex
    for m in sorted(blocks):
        if m + 1 not in blocks:
            continue
        comp = {}
        for c in space.cells:
            src = offsets[m].get(c)
            dst = offsets[m + 1].get(c)
            if not src or not dst:
                continue
            mat = RationalMatrix.zero(sheaves[m + 1].dim(c), sheaves[m].dim(c))
            for (t, p), coff in src.items():
                # transposed incidence-weighted restrictions: t' a facet of t
                for (tp, sign) in cx.facets(t):
                    if (tp, p) in dst:
                        blk = F.sheaf(p).restriction_step(tp, t).transpose()
                        if sign < 0:
                            blk = blk.scale(-1)
                        _insert(mat, dst[(tp, p)], coff, blk)
                # transposed internal differential, sign (-1)^{dim t}
                if (t, p - 1) in dst:
                    blk = F.diff_at(p - 1, t).transpose()
                    if (len(t) - 1) % 2:
                        blk = blk.scale(-1)
                    _insert(mat, dst[(t, p - 1)], coff, blk)
            comp[c] = mat
        if comp:
            diffs[m] = comp
    return SheafComplex(space, sheaves, diffs)


def dualizing_complex(space_or_complex):
    space = space_or_complex if isinstance(space_or_complex, CellSpace) \
        else CellSpace(space_or_complex)
    return verdier_dual(SheafComplex.from_sheaf(CellularSheaf.constant(space)))


def pushforward_proper(f, F, check=True):
    """Direct image with proper supports, via conjugation by duality."""
    return verdier_dual(pushforward_derived(f, verdier_dual(F), check=check))


def upper_shriek(f, G):
    """Exceptional inverse image, via conjugation by duality."""
    return verdier_dual(pullback(f, verdier_dual(G)))


def proper_pushforward_open_region(region, F):
    """Lower-shriek extension along an open region: extension by zero."""
    return extend_by_zero_complex(F, region)


# -- hyperext -------------------------------------------------------------------


def hyperext(F, G, check=True):
    """Graded dimensions of Ext(F, G) on a common space.

    Resolves G injectively; the Hom complex has, in degree n, one block
    Hom(F^p(s), V) per elementary summand (s, V) of the resolution in degree
    p + n, with differential d_I o phi - (-1)^n phi o d_F.
    """
    if F.space != G.space:
        raise SheafValidationError("hyperext of sheaves on different spaces")
    I = injective_resolution(G, check=check)
    space = F.space
    fdegs = F.degrees()
    if not fdegs:
        return {}
    # block layout per total degree n
    layout = {}
    ns = sorted({ideg - p for ideg in I.degrees() for p in fdegs})
    for n in ns:
        lst = []
        for p in fdegs:
            for (q, s, m) in I.summands.get(p + n, []):
                fd = F.dim(p, s)
                if fd and m:
                    lst.append((p, q, s, m, fd))
        if lst:
            layout[n] = lst
    dims = {n: sum(m * fd for (_, _, _, m, fd) in lst) for n, lst in layout.items()}
    diffs = {}
    for n in sorted(layout):
        if n + 1 not in layout:
            continue
        src = layout[n]
        dst = layout[n + 1]
        src_off = {}
        off = 0
        for (p, q, s, m, fd) in src:
            src_off[(p, q, s)] = off
            off += m * fd
        dst_off = {}
        off = 0
        for (p, q, s, m, fd) in dst:
            dst_off[(p, q, s)] = off
            off += m * fd
        mat = RationalMatrix.zero(dims[n + 1], dims[n])
        sign = -1 if n % 2 else 1
        for (p, q, s, m, fd) in src:
            coff = src_off[(p, q, s)]
            # term 1: d_I o phi ; component at summand (q2, s2) of I^{p+n+1}
            for (p2, q2, s2, m2, fd2) in dst:
                if p2 != p:
                    continue
                if not set(s2) <= set(s):
                    continue
                d_at = I.complex.diff_at(p + n, s2)
                offs_src = I.stalk_offsets(p + n, s2)
                offs_dst = I.stalk_offsets(p + n + 1, s2)
                if (q, s) not in offs_src or (q2, s2) not in offs_dst:
                    continue
                so = offs_src[(q, s)]
                do = offs_dst[(q2, s2)]
                L = RationalMatrix(m2, m, [row[so:so + m] for row in d_at.data[do:do + m2]])
                if L.is_zero():
                    continue
                R = F.sheaf(p).restriction(s2, s)   # F^p(s2) -> F^p(s)
                blk = _kron_rowmajor(L, R.transpose())
                _insert(mat, dst_off[(p, q2, s2)], coff, blk)
            # term 2: -(-1)^n phi o d_F ; lands at internal degree p - 1
            key = (p - 1, q, s)
            if key in dst_off:
                dF = F.diff_at(p - 1, s)   # F^{p-1}(s) -> F^p(s)
                blk = _kron_rowmajor(RationalMatrix.identity(m), dF.transpose())
                blk = blk.scale(-sign)
                _insert(mat, dst_off[key], coff, blk)
        diffs[n] = mat
    return SpaceComplex(dims, diffs, check=True).cohomology()


def _kron_rowmajor(L, Rt):
    """Operator on row-major-flattened matrices: psi -> L psi R, R = Rt^T."""
    m2, m1 = L.rows, L.cols
    s1, s2 = Rt.rows, Rt.cols   # Rt: s1 x s2 = R^T with R: s2 x s1
    out = RationalMatrix.zero(m2 * s1, m1 * s2)
    for i in range(m2):
        for k in range(m1):
            a = L.data[i][k]
            if not a:
                continue
            for j in range(s1):
                for l in range(s2):
                    b = Rt.data[j][l]
                    if b:
                        out.data[i * s1 + j][k * s2 + l] = a * b
    return out


def hom_dimension(F, G):
    """Dimension of the space of morphisms F -> G (chain maps, not derived)."""
    from .sheaves import hom_space_basis
    return len(hom_space_basis(F, G))


# -- local cohomology ------------------------------------------------------------


def local_cohomology(Z, F, check=True, with_triangle=False):
    """Cohomology supported in a locally closed region.

    For closed Z this is the shifted cone on restriction to the complement;
    in general Z = Y minus Y' with Y its closure, and the answer is the cone
    on the induced map of the two supported-sections complexes.
    """
    space = F.space
    region = Z if isinstance(Z, CellRegion) else CellRegion(space.complex, Z, "locally_closed")
    zcells = frozenset(region.cells) & space.cells
    ycells = frozenset(x for z in zcells for x in faces_of(z) if x in space.cells)
    yprime = ycells - zcells
    I = injective_resolution(F, check=check)
    all_cells = space.cells
    sc_all, ch_all = I.sections_complex(all_cells, with_summands=True)
    sc_y, ch_y = I.sections_complex(all_cells - ycells, with_summands=True)
    sc_yp, ch_yp = I.sections_complex(all_cells - yprime, with_summands=True)
    r_y = I.sections_restriction(ch_all, ch_y, sc_all, sc_y)
    r_yp = I.sections_restriction(ch_all, ch_yp, sc_all, sc_yp)
    cone_y, _ = cone(r_y)
    cone_yp, _ = cone(r_yp)
    c_y = cone_y.shift(-1)
    c_yp = cone_yp.shift(-1)
    # map C_{Y'} -> C_Y from the square (id, restriction)
    r_between = I.sections_restriction(ch_yp, ch_y, sc_yp, sc_y)
    sq = cone_map(r_yp, r_y, SpaceMap(sc_all, sc_all,
                                      {n: RationalMatrix.identity(sc_all.dim(n))
                                       for n in sc_all.dims}, check=False),
                  r_between)
    shifted = SpaceMap(c_yp, c_y, {n: sq.mat(n - 1) for n in
                                   set(list(c_yp.dims) + list(c_y.dims))}, check=False)
    out_cx, _ = cone(shifted)
    result = out_cx.cohomology()
    if with_triangle:
        return result, (c_yp, c_y, shifted)
    return result


def local_cohomology_triangle_report(Y, Z, F, check=True):
    """Exactness report for the supported-sections long exact sequence.

    ``Y`` must be closed inside the locally closed region ``Z``; the triangle
    relates supports in Y, in Z, and in Z minus Y.  Returns a dict with the
    three graded dimension tables, the ranks of the induced maps, and an
    ``exact`` flag computed from the rank identities at every node.
    """
    space = F.space
    zc = frozenset(Z.cells) & space.cells
    yc = frozenset(Y.cells) & space.cells
    if not yc <= zc:
        raise ValueError("Y must be contained in Z")
    # Y closed in Z: faces of Y-cells inside Z stay in Y
    for c in yc:
        for f in faces_of(c):
            if f in zc and f not in yc:
                raise ValueError("Y is not closed in Z")
    I = injective_resolution(F, check=check)
    A = _supported_complex(I, yc)
    B = _supported_complex(I, zc)
    u = _supported_map(I, yc, zc)
    C, incl, proj = _cone_with_maps(u)
    hA, hB, hC = A.cohomology(), B.cohomology(), C.cohomology()
    ranks_u = {k: _induced_rank(u, k) for k in set(hA) | set(hB)}
    ranks_v = {k: _induced_rank(incl, k) for k in set(hB) | set(hC)}
    ranks_w = {k: _induced_rank(proj, k) for k in set(hC) | set(_shift_dims(hA, -1))}
    exact = True
    degs = sorted(set(hA) | set(hB) | set(hC) | {k - 1 for k in hA})
    for k in degs:
        if ranks_u.get(k, 0) != hB.get(k, 0) - ranks_v.get(k, 0):
            exact = False
        if ranks_v.get(k, 0) != hC.get(k, 0) - ranks_w.get(k, 0):
            exact = False
        if ranks_w.get(k, 0) != hA.get(k + 1, 0) - ranks_u.get(k + 1, 0):
            exact = False
    alt = sum((-1) ** k * (hA.get(k, 0) - hB.get(k, 0) + hC.get(k, 0)) for k in degs)
    return {
        "H_Y": hA, "H_Z": hB, "H_Z_minus_Y": hC,
        "rank_u": ranks_u, "rank_v": ranks_v, "rank_w": ranks_w,
        "alternating_sum": alt, "exact": exact and alt == 0,
    }


def _shift_dims(dims, n):
    return {k - n: v for k, v in dims.items()}


def _supported_complex(I, support_cells):
    all_cells = I.space.cells
    sc_all, ch_all = I.sections_complex(all_cells, with_summands=True)
    sc_c, ch_c = I.sections_complex(all_cells - support_cells, with_summands=True)
    r = I.sections_restriction(ch_all, ch_c, sc_all, sc_c)
    cc, _ = cone(r)
    return cc.shift(-1)


def _supported_map(I, small, big):
    """Map of supported-sections complexes for nested supports small <= big."""
    all_cells = I.space.cells
    sc_all, ch_all = I.sections_complex(all_cells, with_summands=True)
    sc_s, ch_s = I.sections_complex(all_cells - small, with_summands=True)
    sc_b, ch_b = I.sections_complex(all_cells - big, with_summands=True)
    r_s = I.sections_restriction(ch_all, ch_s, sc_all, sc_s)
    r_b = I.sections_restriction(ch_all, ch_b, sc_all, sc_b)
    between = I.sections_restriction(ch_s, ch_b, sc_s, sc_b)
    ident = SpaceMap(sc_all, sc_all,
                     {n: RationalMatrix.identity(sc_all.dim(n)) for n in sc_all.dims},
                     check=False)
    sq = cone_map(r_s, r_b, ident, between)
    c_s, _ = cone(r_s)
    c_b, _ = cone(r_b)
    src = c_s.shift(-1)
    dst = c_b.shift(-1)
    return SpaceMap(src, dst,
                    {n: sq.mat(n - 1) for n in set(list(src.dims) + list(dst.dims))},
                    check=False)


def _cone_with_maps(f):
    C, offsets = cone(f)
    A, B = f.src, f.dst
    incl = {}
    proj = {}
    for k in C.dims:
        da1 = A.dim(k + 1)
        db = B.dim(k)
        mi = RationalMatrix.zero(da1 + db, db)
        _insert(mi, da1, 0, RationalMatrix.identity(db))
        incl[k] = mi
        mp = RationalMatrix.zero(da1, da1 + db)
        _insert(mp, 0, 0, RationalMatrix.identity(da1))
        proj[k] = mp
    incl_m = SpaceMap(B, C, incl, check=False)
    proj_m = SpaceMap(C, A.shift(1), proj, check=False)
    return C, incl_m, proj_m


def _induced_rank(f, k):
    """Rank of the induced map on degree-k cohomology."""
    A, B = f.src, f.dst
    zA = A.diff(k).kernel_basis() if A.dim(k) else []
    if not zA:
        return 0
    imB = B.diff(k - 1)
    u = f.mat(k)
    cols = [u.apply(v) for v in zA]
    im_cols = [[imB.data[i][j] for i in range(imB.rows)] for j in range(imB.cols)] \
        if imB.cols else []
    big = column_matrix(im_cols + cols, length=B.dim(k))
    base = column_matrix(im_cols, length=B.dim(k))
    return big.rank() - base.rank()


def excision_report(Z, F, V):
    """Compare supported cohomology computed in X and in an open V containing Z."""
    full = local_cohomology(Z, F)
    vcells = frozenset(V.cells)
    sub = F.restrict(vcells & F.space.cells)
    zr = CellRegion(F.space.complex, frozenset(Z.cells) & vcells, "locally_closed")
    inner = local_cohomology(zr, sub)
    return {"ambient": full, "open_subspace": inner, "equal": full == inner}


# -- base change at point fibers --------------------------------------------------


def base_change_point_fiber(f, F, y, check=True):
    """Compare the shriek-pushforward stalk over an open cell with the
    compactly supported cohomology of the fiber over a point of that cell.

    The stalk of the proper pushforward is constant on the open cell, so any
    interior point serves; the fiber over the cell's barycenter is carved out
    as a subcomplex region by cutting the source along the pulled-back
    coordinate levels (this requires each target coordinate of the map to be
    globally affine on the source, which holds for projections, collapses and
    embeddings; otherwise the refinement step fails loudly).
    """
    if y not in f.target.cells:
        raise KeyError("cell %r not in target" % (y,))
    pf = pushforward_proper(f, F, check=check)
    lhs = pf.stalk_cohomology(y)
    cx, G, fiber = _point_fiber(f, F, y)
    if fiber:
        ext = extend_by_zero_complex(G.restrict(frozenset(fiber) & G.space.cells))
        rhs = derived_sections(ext, None, check=check)
    else:
        rhs = {}
    return {"pushforward_stalk": lhs, "fiber_compact_cohomology": rhs,
            "equal": lhs == rhs}


def _point_fiber(f, F, y):
    """Refine the source so the fiber over the barycenter of y is a region."""
    from .complexes import subdivide_along_level, level_value
    source = f.source
    if len(y) == 1:
        fiber = f.fiber_cells(y)
        return source, F, fiber
    targets = f.target.barycenter(y)
    # target coordinate j as a global affine function on the source
    funcs = []
    verts = sorted(source.coordinates)
    for j in range(f.target.ambient_dim):
        rows = [list(source.coordinates[v]) + [Fraction(1)] for v in verts]
        rhs = [f.target.coordinates[f.vertex_map[v]][j] for v in verts]
        sol = RationalMatrix.from_rows(rows).solve(rhs)
        if sol is None:
            raise SheafValidationError(
                "fiber is not a subcomplex region and the map's coordinates "
                "are not affine on the source; cannot refine")
        funcs.append((sol[:-1], sol[-1]))
    cx, G = source, F
    for j, (lin, const) in enumerate(funcs):
        cx2, cmap = subdivide_along_level(cx, lin, targets[j] - const)
        if cx2 is not cx:
            G = pullback_cells(G, CellSpace(cx2), cmap.image)
            cx = cx2
    fiber = set()
    for cell in cx.cells:
        on_all = True
        for j, (lin, const) in enumerate(funcs):
            if any(level_value(cx, lin, v) + const != targets[j] for v in cell):
                on_all = False
                break
        if on_all:
            fiber.add(cell)
    return cx, G, frozenset(fiber)
