"""Characteristic cycles via conormal chambers and local Morse indices.

A conormal chamber of a cell is a maximal open cone of covectors annihilating
the cell's direction space, classified by the strict signs taken on the link
vertices.  The multiplicity a sheaf complex attaches to a chamber is the
local Morse index: the stalk Euler characteristic minus the Euler
characteristic of the derived sections over the open lower half-star cut out
by any witness covector of the chamber.  Summing vertex multiplicities at a
generic covector computes the global Euler characteristic (the index
pairing); all of this is exact rational arithmetic.
"""

from fractions import Fraction

from .linalg import RationalMatrix, feasible_strict
from .complexes import CellRegion, subdivide_along_level, level_value
from .sheaves import CellSpace, SheafComplex, chi_local, cohomology_sheaves
from .functors import derived_sections, pullback_cells
from .euler import euler_global


class GenericityError(ValueError):
    """A covector touched a chamber wall; callers should redraw."""


class ConormalChamber:
    """A full-dimensional sign chamber of the conormal space of a cell.

    ``signs`` maps link vertices (in sorted order) to +1/-1 via a tuple; the
    ``witness`` is an exact covector in the chamber's interior, zero for the
    unique chamber of a maximal cell.
    """

    __slots__ = ("cell", "link", "signs", "witness")

    def __init__(self, cell, link, signs, witness):
        self.cell = cell
        self.link = tuple(link)
        self.signs = tuple(signs)
        self.witness = tuple(Fraction(x) for x in witness)

    def key(self):
        return (self.cell, self.signs)

    def sign_of(self, vertex):
        return self.signs[self.link.index(vertex)]

    def __repr__(self):
        pretty = "".join("+" if s > 0 else "-" for s in self.signs)
        return "ConormalChamber(%r, %s)" % (self.cell, pretty or "zero")


def _conormal_basis(cx, cell):
    """Basis of the annihilator of the cell's direction space."""
    dirs = cx.direction_vectors(cell)
    if not dirs:
        return [[Fraction(1) if i == j else Fraction(0) for i in range(cx.ambient_dim)]
                for j in range(cx.ambient_dim)]
    return RationalMatrix.from_rows(dirs).kernel_basis()


def chambers(cx, cell):
    """All feasible conormal chambers of a cell, each with an exact witness.

    Enumerates the full-dimensional sign vectors of the central arrangement
    of link-vertex hyperplanes inside the conormal space by inserting the
    hyperplanes one at a time and testing the flipped side exactly; maximal
    cells get the single zero chamber.
    """
    cache = cx._chambers_cache
    got = cache.get(cell)
    if got is not None:
        return got
    link = cx.link_vertices(cell)
    if not link:
        out = [ConormalChamber(cell, (), (), [Fraction(0)] * cx.ambient_dim)]
        cache[cell] = out
        return out
    basis = _conormal_basis(cx, cell)
    p = cx.coordinates[cell[0]]
    arr = []
    for w in link:
        d = [cx.coordinates[w][i] - p[i] for i in range(cx.ambient_dim)]
        arr.append([sum(b[i] * d[i] for i in range(cx.ambient_dim)) for b in basis])
    k = len(basis)
    # seed: one chamber of the empty arrangement, any nonzero point
    partial = [((), [Fraction(1)] + [Fraction(0)] * (k - 1))]
    for idx, a in enumerate(arr):
        new = []
        for signs, y in partial:
            val = sum(ai * yi for ai, yi in zip(a, y))
            rows = [[s * x for x in arr[i]] for i, s in enumerate(signs)]
            if val != 0:
                s0 = 1 if val > 0 else -1
                new.append((signs + (s0,), y))
                flip = feasible_strict(rows + [[-s0 * x for x in a]])
                if flip is not None:
                    new.append((signs + (-s0,), flip))
            else:
                for s0 in (1, -1):
                    wit = feasible_strict(rows + [[s0 * x for x in a]])
                    if wit is not None:
                        new.append((signs + (s0,), wit))
        partial = new
    out = []
    for signs, y in partial:
        xi = [sum(y[j] * basis[j][i] for j in range(k)) for i in range(cx.ambient_dim)]
        ch = ConormalChamber(cell, link, signs, _clear_denominators(xi))
        _check_witness(cx, ch)
        out.append(ch)
    out.sort(key=lambda c: c.signs)
    cache[cell] = out
    return out


def _clear_denominators(vec):
    den = 1
    for x in vec:
        if x:
            den = den * x.denominator // _gcd(den, x.denominator)
    return [Fraction(int(x * den)) for x in vec]


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _check_witness(cx, ch):
    p = cx.coordinates[ch.cell[0]]
    for w, s in zip(ch.link, ch.signs):
        val = sum(ch.witness[i] * (cx.coordinates[w][i] - p[i])
                  for i in range(cx.ambient_dim))
        if (val > 0) != (s > 0) or val == 0:
            raise GenericityError("witness does not realize its sign vector")
    for d in cx.direction_vectors(ch.cell):
        if sum(ch.witness[i] * d[i] for i in range(cx.ambient_dim)) != 0:
            raise GenericityError("witness is not conormal to the cell")


def chamber_of(cx, cell, xi):
    """The chamber of the given cell containing the covector, by sign lookup."""
    link = cx.link_vertices(cell)
    p = cx.coordinates[cell[0]]
    signs = []
    for w in link:
        val = sum(Fraction(xi[i]) * (cx.coordinates[w][i] - p[i])
                  for i in range(cx.ambient_dim))
        if val == 0:
            raise GenericityError(
                "covector lies on a chamber wall at %r (link vertex %r)" % (cell, w))
        signs.append(1 if val > 0 else -1)
    return tuple(signs)


# -- the local Morse index ------------------------------------------------------


def _star_cut(cx, cell, chamber):
    """Cut the closed star along the witness level; cached per (cell, signs).

    Returns (closed star subcomplex, refined star, refinement map, region),
    where the region is the set of refined cells lying in the open star and
    strictly below the level.
    """
    key = (cell, chamber.signs)
    got = cx._star_cut_cache.get(key)
    if got is not None:
        return got
    W = cx.subcomplex(cx.closed_star(cell))
    xi = chamber.witness
    c = level_value(cx, xi, cell[0])
    refined, cmap = subdivide_along_level(W, xi, c)
    star = W.star(cell)
    region = set()
    for piece in refined.cells:
        if cmap.image(piece) not in star:
            continue
        vals = [level_value(refined, xi, v) - c for v in piece]
        if any(x > 0 for x in vals):
            continue
        if any(x < 0 for x in vals):
            region.add(piece)
    region = frozenset(region)
    sub = CellSpace(refined, region)
    if region and not sub.is_open():
        raise GenericityError("lower half-star is not coface-closed")
    got = (W, refined, cmap, region)
    cx._star_cut_cache[key] = got
    return got


def microlocal_multiplicity(F, cell, chamber, check=True):
    """Local Morse index of a sheaf complex at (cell, chamber).

    Stalk Euler characteristic minus the Euler characteristic of the derived
    sections over the open lower half-star of the chamber's witness level;
    for the zero chamber of a maximal cell the second term is empty and the
    stalk value is returned.
    """
    cx = F.space.complex
    if chamber.cell != cell:
        raise ValueError("chamber does not belong to the cell")
    chi_stalk = sum((-1) ** k * F.dim(k, cell) for k in F.degrees())
    if not chamber.signs:
        return chi_stalk
    W, refined, cmap, region = _star_cut(cx, cell, chamber)
    if not region:
        return chi_stalk
    G = F.restrict(F.space.cells & W.cells)
    Gr = pullback_cells(G, CellSpace(refined), cmap.image)
    dims = derived_sections(Gr, region, check=check)
    return chi_stalk - sum((-1) ** k * d for k, d in dims.items())


class ConormalCycle:
    """Integer multiplicity per (cell, chamber); componentwise group structure."""

    def __init__(self, complex, multiplicities=None, witnesses=None):
        self.complex = complex
        self.m = {}
        if multiplicities:
            for key, v in multiplicities.items():
                if v:
                    self.m[key] = int(v)
        self.witnesses = dict(witnesses or {})

    def multiplicity(self, cell, signs):
        return self.m.get((cell, tuple(signs)), 0)

    def __add__(self, other):
        out = dict(self.m)
        for key, v in other.m.items():
            out[key] = out.get(key, 0) + v
        wit = dict(self.witnesses)
        wit.update(other.witnesses)
        return ConormalCycle(self.complex, out, wit)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, n):
        return ConormalCycle(self.complex,
                             {k: n * v for k, v in self.m.items()}, self.witnesses)

    def __eq__(self, other):
        return isinstance(other, ConormalCycle) and self.m == other.m

    def support(self):
        return frozenset(self.m)

    def entries(self):
        return sorted(self.m.items(), key=lambda kv: (len(kv[0][0]), kv[0]))

    def is_zero(self):
        return not self.m


def characteristic_cycle(F, check=True):
    """Assemble the local Morse indices over every (cell, chamber) pair.

    The multiplicity is a finite difference of Euler characteristics, both of
    which only depend on the local Euler characteristic of the complex, so
    cells on whose closed star that function vanishes are skipped.
    """
    cx = F.space.complex
    if not F.space.is_full():
        raise ValueError("characteristic cycles are computed on full complexes")
    chi = chi_local(F, check=False)
    mult = {}
    wit = {}
    for cell in cx.sorted_cells():
        chams = chambers(cx, cell)
        star_chi_zero = all(chi[c] == 0 for c in cx.closed_star(cell))
        for ch in chams:
            wit[(cell, ch.signs)] = ch.witness
            if star_chi_zero:
                continue
            m = microlocal_multiplicity(F, cell, ch, check=check)
            if m:
                mult[(cell, ch.signs)] = m
    return ConormalCycle(cx, mult, wit)


def index_pairing(cycle, xi):
    """Sum of vertex multiplicities at the chambers containing the covector.

    The covector must be generic: nonconstant on every edge (equivalently it
    avoids every chamber wall at every vertex); a wall hit raises
    GenericityError so callers can redraw.
    """
    cx = cycle.complex
    xi = [Fraction(x) for x in xi]
    for (a, b) in cx.cells_of_dim(1):
        val = sum(xi[i] * (cx.coordinates[b][i] - cx.coordinates[a][i])
                  for i in range(cx.ambient_dim))
        if val == 0:
            raise GenericityError("covector is constant on edge %r" % ((a, b),))
    total = 0
    for v in cx.cells_of_dim(0):
        signs = chamber_of(cx, v, xi)
        total += cycle.multiplicity(v, signs)
    return total


def generic_covector(cx, rng, bound=9):
    """Seeded random covector, redrawn until generic."""
    for _ in range(1000):
        xi = [Fraction(rng.randint(-bound, bound)) for _ in range(cx.ambient_dim)]
        try:
            for (a, b) in cx.cells_of_dim(1):
                if sum(xi[i] * (cx.coordinates[b][i] - cx.coordinates[a][i])
                       for i in range(cx.ambient_dim)) == 0:
                    raise GenericityError("redraw")
        except GenericityError:
            continue
        return xi
    raise GenericityError("could not draw a generic covector")


def cc_pushforward_closed(cycle, sub, ambient):
    """Transport a cycle on a full closed subcomplex into the ambient complex.

    For a cell of the subcomplex and an ambient chamber, the output
    multiplicity is the input multiplicity at the subcomplex chamber picked
    out by the witness's signs on the subcomplex link; cells outside carry
    zero.  This realizes proper pushforward along the closed embedding.
    """
    for c in sub.cells:
        if c not in ambient.cells:
            raise ValueError("subcomplex cell %r missing from ambient" % (c,))
    for v in sub.coordinates:
        if ambient.coordinates.get(v) != sub.coordinates[v]:
            raise ValueError("vertex %r has different coordinates" % (v,))
    subverts = set(sub.coordinates)
    for c in ambient.cells:
        if set(c) <= subverts and c not in sub.cells:
            raise ValueError("subcomplex is not full: %r missing" % (c,))
    mult = {}
    wit = {}
    for cell in ambient.sorted_cells():
        for ch in chambers(ambient, cell):
            wit[(cell, ch.signs)] = ch.witness
            if cell not in sub.cells:
                continue
            signs = chamber_of(sub, cell, ch.witness)
            m = cycle.multiplicity(cell, signs)
            if m:
                mult[(cell, ch.signs)] = m
    return ConormalCycle(ambient, mult, wit)


def cc_additivity_check(phi, check=True):
    """Entrywise cycle additivity on a mapping cone, with any violations listed."""
    from .sheaves import mapping_cone

    cone_c, _, _ = mapping_cone(phi)
    cc_src = characteristic_cycle(phi.source, check=check)
    cc_dst = characteristic_cycle(phi.target, check=check)
    cc_cone = characteristic_cycle(cone_c, check=check)
    expected = cc_dst - cc_src
    bad = []
    for key in set(cc_cone.m) | set(expected.m):
        if cc_cone.m.get(key, 0) != expected.m.get(key, 0):
            bad.append((key, cc_cone.m.get(key, 0), expected.m.get(key, 0)))
    return {"additive": not bad, "violations": bad,
            "cone": cc_cone, "expected": expected}


def cc_cohomology_decomposition_check(F, check=True):
    """Compare the cycle of a complex with the signed sum over its cohomology
    sheaves, entrywise."""
    direct = characteristic_cycle(F, check=check)
    hs, _ = cohomology_sheaves(F)
    total = ConormalCycle(F.space.complex)
    for k, sheaf in hs.items():
        piece = characteristic_cycle(SheafComplex.from_sheaf(sheaf), check=check)
        total = total + piece.scale((-1) ** k)
    bad = []
    for key in set(direct.m) | set(total.m):
        if direct.m.get(key, 0) != total.m.get(key, 0):
            bad.append((key, direct.m.get(key, 0), total.m.get(key, 0)))
    return {"equal": not bad, "violations": bad, "direct": direct, "decomposed": total}


def external_multiplicativity(F, G, product, proj_first, proj_second,
                              rng, samples=5, check=True):
    """Sampled check that multiplicities multiply at vertex pairs of a product.

    ``product`` with its two simplicial projections must be the staircase
    product of the factors' complexes.  For each sample a random vertex pair
    and random generic covectors on both factors are drawn (redrawn if the
    concatenated covector touches a wall in the product), and the product
    multiplicity is compared with the product of the factor multiplicities.
    """
    from .sheaves import tensor_complexes
    from .functors import pullback

    cx, cz = F.space.complex, G.space.complex
    big = tensor_complexes(pullback(proj_first, F), pullback(proj_second, G))
    rows = []
    ok = True
    pverts = product.cells_of_dim(0)
    for _ in range(samples):
        for _attempt in range(200):
            pv = pverts[rng.randrange(len(pverts))][0]
            v = (proj_first.vertex_map[pv],)
            w = (proj_second.vertex_map[pv],)
            xi = [Fraction(rng.randint(-9, 9)) for _ in range(cx.ambient_dim)]
            eta = [Fraction(rng.randint(-9, 9)) for _ in range(cz.ambient_dim)]
            try:
                ch_v = chamber_of(cx, v, xi)
                ch_w = chamber_of(cz, w, eta)
                ch_p = chamber_of(product, (pv,), list(xi) + list(eta))
            except GenericityError:
                continue
            break
        else:
            raise GenericityError("could not draw generic product covectors")
        m_v = _multiplicity_at(F, v, xi, check=check)
        m_w = _multiplicity_at(G, w, eta, check=check)
        m_p = _multiplicity_at(big, (pv,), list(xi) + list(eta), check=check)
        rows.append({"vertex_pair": (v[0], w[0]), "factors": (m_v, m_w),
                     "product": m_p, "equal": m_p == m_v * m_w})
        ok = ok and m_p == m_v * m_w
    return {"multiplicative": ok, "samples": rows}


def _multiplicity_at(F, cell, xi, check=True):
    cx = F.space.complex
    signs = chamber_of(cx, cell, xi)
    for ch in chambers(cx, cell):
        if ch.signs == signs:
            return microlocal_multiplicity(F, cell, ch, check=check)
    raise GenericityError("no feasible chamber matches the covector signs")


def index_theorem_check(F, rng, samples=20, check=True):
    """Index pairing against the global Euler characteristic, many covectors."""
    cyc = characteristic_cycle(F, check=check)
    chi = euler_global(F, check=check)
    results = []
    ok = True
    for _ in range(samples):
        xi = generic_covector(F.space.complex, rng)
        pairing = index_pairing(cyc, xi)
        results.append((xi, pairing))
        ok = ok and pairing == chi
    return {"euler": chi, "agree": ok, "pairings": results, "cycle": cyc}
