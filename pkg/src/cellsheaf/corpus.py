"""Bundled example complexes and sheaf families used by the verification suite.

Every item carries an embedded complex with exact rational coordinates plus a
family of named sheaf complexes: constants, extensions by zero, derived
pushforwards from open regions, closed-subcomplex extensions, skyscrapers,
rank-one local systems where the topology allows, and a seeded random bounded
complex of rank at most two.
"""

import random
from fractions import Fraction

from .complexes import CellRegion, build_complex, staircase_product
from .linalg import RationalMatrix
from .sheaves import (CellSpace, CellularSheaf, SheafComplex, SheafMorphism,
                      extension_by_zero, local_system, mapping_cone,
                      hom_space_basis)
from .functors import pushforward_open_region


def interval():
    return build_complex({0: [0], 1: [1]}, [[0, 1]])


def subdivided_interval():
    return build_complex({0: [0], 1: [Fraction(1, 2)], 2: [1]}, [[0, 1], [1, 2]])


def circle():
    return build_complex({0: [1, 0], 1: [0, 1], 2: [-1, -1]},
                         [[0, 1], [1, 2], [0, 2]])


def octahedron():
    return build_complex(
        {0: [1, 0, 0], 1: [-1, 0, 0], 2: [0, 1, 0],
         3: [0, -1, 0], 4: [0, 0, 1], 5: [0, 0, -1]},
        [[0, 2, 4], [1, 2, 4], [1, 3, 4], [0, 3, 4],
         [0, 2, 5], [1, 2, 5], [1, 3, 5], [0, 3, 5]])


def staircase_torus():
    c = circle()
    torus, _, _ = staircase_product(c, c)
    return torus


def equator_cells(oc):
    return frozenset(c for c in oc.cells if set(c) <= {0, 1, 2, 3})


def southern_hemisphere_cells(oc):
    return frozenset(c for c in oc.cells if 5 in c)


def torus_subcircle_cells(torus):
    """A full subcomplex circle inside the staircase torus (fixed second factor)."""
    anchor = torus.coordinates[min(torus.coordinates)][2:]
    verts = {v for v in torus.coordinates if torus.coordinates[v][2:] == anchor}
    return frozenset(c for c in torus.cells if set(c) <= verts)


def constant_complex(cx, rank=1):
    return SheafComplex.from_sheaf(CellularSheaf.constant(CellSpace(cx), rank))


def skyscraper(cx, vertex):
    return extension_by_zero(CellRegion(cx, [(vertex,)], "closed"))


def random_bounded_complex(cx, rng, max_rank=2):
    """Seeded random two-term complex with stalk ranks at most ``max_rank``.

    Built as the mapping cone of a random morphism between sums of valid
    building blocks, so every invariant holds by construction.
    """
    A = _random_block(cx, rng, max_rank)
    B = _random_block(cx, rng, max_rank)
    basis = hom_space_basis(A, B)
    if not basis:
        phi = SheafMorphism.zero(A, B)
    else:
        weights = [rng.randint(-2, 2) for _ in basis]
        if not any(weights):
            weights[0] = 1
        phi = _combine_morphisms(A, B, basis, weights)
    cone_c, _, _ = mapping_cone(phi)
    return cone_c


def _combine_morphisms(A, B, basis, weights):
    comps = {}
    for w, b in zip(weights, basis):
        if not w:
            continue
        for k, comp in b.components.items():
            dst = comps.setdefault(k, {})
            for c, m in comp.items():
                scaled = m.scale(w)
                if c in dst:
                    dst[c] = dst[c] + scaled
                else:
                    dst[c] = scaled
    return SheafMorphism(A, B, comps, check=False)


def _random_block(cx, rng, max_rank):
    kind = rng.choice(["constant", "star", "closed_cell", "vertex"])
    rank = rng.randint(1, max_rank)
    space = CellSpace(cx)
    if kind == "constant":
        return SheafComplex.from_sheaf(CellularSheaf.constant(space, rank))
    cells = sorted(cx.cells)
    if kind == "star":
        c = cells[rng.randrange(len(cells))]
        return extension_by_zero(CellRegion(cx, cx.star(c), "open"), rank)
    if kind == "closed_cell":
        c = cells[rng.randrange(len(cells))]
        closed = [f for f in cx.closed_star(c) if set(f) <= set(c)]
        return extension_by_zero(CellRegion(cx, closed, "closed"), rank)
    v = sorted(cx.coordinates)[rng.randrange(len(cx.coordinates))]
    return extension_by_zero(CellRegion(cx, [(v,)], "closed"), rank)


def random_morphism(F, G, rng):
    basis = hom_space_basis(F, G)
    if not basis:
        return SheafMorphism.zero(F, G)
    weights = [rng.randint(-2, 2) for _ in basis]
    if not any(weights):
        weights[rng.randrange(len(weights))] = 1
    return _combine_morphisms(F, G, basis, weights)


def open_star_pushforwards(cx, vertex, check=True):
    """j_! and the derived direct image for the open star of a vertex."""
    region = CellRegion(cx, cx.star((vertex,)), "open")
    shriek = extension_by_zero(region)
    inside = SheafComplex.from_sheaf(
        CellularSheaf.constant(CellSpace(cx, region.cells)))
    star = pushforward_open_region(region, inside, check=check)
    return shriek, star, region


def bundled_sheaves(name, cx, rng, check=True):
    """The named item's sheaf family as a list of (label, sheaf complex)."""
    out = []
    out.append(("constant", constant_complex(cx)))
    v0 = sorted(cx.coordinates)[0]
    out.append(("skyscraper", skyscraper(cx, v0)))
    if name == "interval":
        U = CellRegion(cx, [(0, 1)], "open")
        out.append(("open_extension", extension_by_zero(U)))
        inner = SheafComplex.from_sheaf(CellularSheaf.constant(CellSpace(cx, U.cells)))
        out.append(("open_pushforward", pushforward_open_region(U, inner, check=check)))
        out.append(("closed_extension", skyscraper(cx, 1)))
    elif name == "subdivided_interval":
        shriek, star, _ = open_star_pushforwards(cx, 1, check=check)
        out.append(("open_extension", shriek))
        out.append(("open_pushforward", star))
    elif name in ("circle", "mobius_circle"):
        out.append(("local_system",
                    SheafComplex.from_sheaf(local_system(cx, 1, {(0, 1): [[-1]]}))))
        shriek, star, _ = open_star_pushforwards(cx, 0, check=check)
        out.append(("open_extension", shriek))
        out.append(("open_pushforward", star))
    elif name == "octahedron":
        shriek, star, _ = open_star_pushforwards(cx, 4, check=check)
        out.append(("open_extension", shriek))
        out.append(("open_pushforward", star))
        out.append(("closed_extension",
                    extension_by_zero(CellRegion(cx, equator_cells(cx), "closed"))))
    elif name == "hemisphere_sphere":
        D = CellRegion(cx, southern_hemisphere_cells(cx), "open")
        out.append(("open_extension", extension_by_zero(D)))
        inner = SheafComplex.from_sheaf(CellularSheaf.constant(CellSpace(cx, D.cells)))
        out.append(("open_pushforward", pushforward_open_region(D, inner, check=check)))
        out.append(("closed_extension",
                    extension_by_zero(CellRegion(cx, equator_cells(cx), "closed"))))
    elif name == "staircase_torus":
        transports = {}
        for (a, b) in cx.cells_of_dim(1):
            pa, pb = cx.coordinates[a], cx.coordinates[b]
            # -1 on the edges crossing the cut of the first circle factor
            if {tuple(pa[:2]), tuple(pb[:2])} == {(Fraction(1), Fraction(0)),
                                                  (Fraction(-1), Fraction(-1))}:
                transports[(a, b)] = [[-1]]
        out.append(("local_system",
                    SheafComplex.from_sheaf(local_system(cx, 1, transports))))
        shriek, star, _ = open_star_pushforwards(cx, sorted(cx.coordinates)[0],
                                                 check=check)
        out.append(("open_extension", shriek))
        out.append(("open_pushforward", star))
        out.append(("closed_extension",
                    extension_by_zero(CellRegion(cx, torus_subcircle_cells(cx),
                                                 "closed"))))
    out.append(("random_complex", random_bounded_complex(cx, rng)))
    return out


ITEM_BUILDERS = {
    "interval": interval,
    "subdivided_interval": subdivided_interval,
    "circle": circle,
    "mobius_circle": circle,
    "octahedron": octahedron,
    "hemisphere_sphere": octahedron,
    "staircase_torus": staircase_torus,
}


def item_names():
    return sorted(ITEM_BUILDERS)


def build_item(name):
    if name not in ITEM_BUILDERS:
        raise KeyError("unknown corpus item %r" % (name,))
    return ITEM_BUILDERS[name]()
