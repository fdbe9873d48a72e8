import random
from fractions import Fraction

import pytest

from cellsheaf.complexes import (CellRegion, barycentric_subdivision,
                                 staircase_product, subdivide_along_level)
from cellsheaf.euler import euler_global
from cellsheaf.functors import pullback_refinement, pushforward_open_region
from cellsheaf.microlocal import (GenericityError, cc_additivity_check,
                                  cc_cohomology_decomposition_check,
                                  cc_pushforward_closed, chamber_of, chambers,
                                  characteristic_cycle, external_multiplicativity,
                                  generic_covector, index_pairing,
                                  microlocal_multiplicity)
from cellsheaf.sheaves import (CellSpace, CellularSheaf, SheafComplex,
                               SheafMorphism, chi_local, extension_by_zero,
                               hom_space_basis, local_system, mapping_cone)
from cellsheaf import corpus
from conftest import chamber_count_oracle, cached_cycle


def const_complex(cx, rank=1):
    return SheafComplex.from_sheaf(CellularSheaf.constant(CellSpace(cx), rank))


# -- chambers ----------------------------------------------------------------------


def test_chambers_endpoint(interval):
    chs = chambers(interval, (0,))
    assert sorted(c.signs for c in chs) == [(-1,), (1,)]


def test_chambers_interior_vertex(subdivided_interval):
    chs = chambers(subdivided_interval, (1,))
    assert sorted(c.signs for c in chs) == [(-1, 1), (1, -1)]


def test_chambers_zero_chamber(interval, octahedron):
    assert [c.signs for c in chambers(interval, (0, 1))] == [()]
    assert [c.signs for c in chambers(octahedron, (0, 2, 4))] == [()]
    zero = chambers(octahedron, (0, 2, 4))[0]
    assert all(x == 0 for x in zero.witness)


def test_chamber_counts_match_exhaustive_oracle(octahedron, torus):
    for cx in (octahedron, torus):
        cells = cx.cells_of_dim(0)[:3] + cx.cells_of_dim(1)[:3]
        for c in cells:
            assert len(chambers(cx, c)) == chamber_count_oracle(cx, c), c


def test_chamber_witness_realizes_signs(octahedron):
    for c in [(0,), (0, 2)]:
        for ch in chambers(octahedron, c):
            got = chamber_of(octahedron, c, ch.witness)
            assert got == ch.signs


# -- multiplicities -----------------------------------------------------------------


def _chamber(cx, cell, signs):
    for ch in chambers(cx, cell):
        if ch.signs == tuple(signs):
            return ch
    raise AssertionError("no such chamber")


def test_example_multiplicities_open_pushforward(interval):
    U = CellRegion(interval, [(0, 1)])
    inner = const_complex(interval).restrict(U.cells)
    F = pushforward_open_region(U, inner)
    # half-fibers point into the interval: positive side at 0, and at 1 the
    # chamber containing the inward covector (negative coordinate direction)
    assert microlocal_multiplicity(F, (0,), _chamber(interval, (0,), (1,))) == 1
    assert microlocal_multiplicity(F, (0,), _chamber(interval, (0,), (-1,))) == 0
    assert microlocal_multiplicity(F, (1,), _chamber(interval, (1,), (1,))) == 1
    assert microlocal_multiplicity(F, (1,), _chamber(interval, (1,), (-1,))) == 0
    assert microlocal_multiplicity(F, (0, 1), _chamber(interval, (0, 1), ())) == 1


def test_example_multiplicities_open_extension(interval):
    F = extension_by_zero(CellRegion(interval, [(0, 1)]))
    assert microlocal_multiplicity(F, (0,), _chamber(interval, (0,), (-1,))) == -1
    assert microlocal_multiplicity(F, (0,), _chamber(interval, (0,), (1,))) == 0


def test_constant_multiplicities_zero_chambers(octahedron, torus):
    for cx in (octahedron, torus):
        F = const_complex(cx)
        for top in cx.maximal_cells()[:4]:
            assert microlocal_multiplicity(F, top, _chamber(cx, top, ())) == 1


def test_multiplicity_constant_across_witnesses(octahedron):
    # rebuild chambers with distinct witnesses by solving from scratch
    from cellsheaf.linalg import feasible_strict
    from cellsheaf.microlocal import _conormal_basis, ConormalChamber
    F = const_complex(octahedron)
    cell = (0,)
    link = octahedron.link_vertices(cell)
    basis = _conormal_basis(octahedron, cell)
    p = octahedron.coordinates[cell[0]]
    arr = []
    for w in link:
        d = [octahedron.coordinates[w][i] - p[i] for i in range(3)]
        arr.append([sum(b[i] * d[i] for i in range(3)) for b in basis])
    rng = random.Random(17)
    for ch in chambers(octahedron, cell)[:5]:
        base = microlocal_multiplicity(F, cell, ch)
        found = 0
        for _ in range(40):
            if found >= 3:
                break
            shift = [Fraction(rng.randint(1, 5)) for _ in arr[0]]
            rows = [[s * x for x in a] for s, a in zip(ch.signs, arr)]
            extra = [[Fraction(rng.randint(-2, 2)) for _ in arr[0]]]
            wit = feasible_strict(rows + [e for e in extra if any(e)])
            if wit is None:
                continue
            xi = [sum(wit[j] * basis[j][i] for j in range(len(basis)))
                  for i in range(3)]
            other = ConormalChamber(cell, link, ch.signs, xi)
            assert microlocal_multiplicity(F, cell, other) == base
            found += 1
        assert found >= 3


# -- assembled cycles ----------------------------------------------------------------


def test_cc_constant_zero_section(interval, circle, octahedron, torus, cycle_cache):
    for name, cx in (("interval", interval), ("circle", circle),
                     ("octahedron", octahedron), ("staircase_torus", torus)):
        cyc = cached_cycle(cycle_cache, name, "constant", const_complex(cx))
        for top in cx.maximal_cells():
            assert cyc.multiplicity(top, ()) == 1, (name, top)


def test_cc_equator_conormal(octahedron, cycle_cache):
    eq = corpus.equator_cells(octahedron)
    F = extension_by_zero(CellRegion(octahedron, eq, "closed"))
    cyc = cached_cycle(cycle_cache, "octahedron", "closed_extension", F)
    for e in [c for c in eq if len(c) == 2]:
        link = octahedron.link_vertices(e)
        assert set(link) == {4, 5}
        for signs in [(-1, 1), (1, -1)]:
            assert cyc.multiplicity(e, signs) == 1, (e, signs)
    # nothing lives over cells outside the closed equator
    for (cell, signs), m in cyc.m.items():
        assert cell in eq
    # matches the transported cycle from the circle subcomplex
    circle_sub = octahedron.subcomplex(eq)
    inner = const_complex(circle_sub)
    pushed = cc_pushforward_closed(characteristic_cycle(inner), circle_sub,
                                   octahedron)
    assert pushed == cyc


def test_cc_pushforward_identity(circle, cycle_cache):
    cyc = cached_cycle(cycle_cache, "circle", "constant", const_complex(circle))
    assert cc_pushforward_closed(cyc, circle, circle) == cyc


def test_cc_pushforward_vertex_full_fiber(interval):
    vx = interval.subcomplex([(0,)])
    sky = const_complex(vx)
    pushed = cc_pushforward_closed(characteristic_cycle(sky), vx, interval)
    assert pushed.multiplicity((0,), (1,)) == 1
    assert pushed.multiplicity((0,), (-1,)) == 1


def test_cc_hemisphere_cylinder(octahedron, cycle_cache):
    D = CellRegion(octahedron, corpus.southern_hemisphere_cells(octahedron))
    inner = const_complex(octahedron).restrict(D.cells)
    F = pushforward_open_region(D, inner)
    cyc = cached_cycle(cycle_cache, "hemisphere_sphere", "open_pushforward", F)
    for t in octahedron.cells_of_dim(2):
        want = 1 if 5 in t else 0
        assert cyc.multiplicity(t, ()) == want, t
    for e in [c for c in corpus.equator_cells(octahedron) if len(c) == 2]:
        link = octahedron.link_vertices(e)
        south = link.index(5)
        for ch in chambers(octahedron, e):
            expected = 1 if ch.signs[south] > 0 else 0
            assert cyc.multiplicity(e, ch.signs) == expected, (e, ch.signs)
    # all nonzero entries over the northern open cells vanish
    for (cell, signs), m in cyc.m.items():
        assert not (4 in cell), (cell, signs, m)


def test_index_theorem_small(interval, circle, octahedron, cycle_cache):
    rng = random.Random(23)
    for name, cx in (("interval", interval), ("circle", circle),
                     ("octahedron", octahedron)):
        F = const_complex(cx)
        cyc = cached_cycle(cycle_cache, name, "constant", F)
        chi = euler_global(F)
        for _ in range(10):
            xi = generic_covector(cx, rng)
            assert index_pairing(cyc, xi) == chi


def test_index_pairing_interval_coordinates(interval, cycle_cache):
    cyc = cached_cycle(cycle_cache, "interval", "constant", const_complex(interval))
    assert index_pairing(cyc, [Fraction(1)]) == 1
    assert index_pairing(cyc, [Fraction(-1)]) == 1


def test_index_pairing_rejects_walls(octahedron, cycle_cache):
    cyc = cached_cycle(cycle_cache, "octahedron", "constant",
                       const_complex(octahedron))
    with pytest.raises(GenericityError):
        index_pairing(cyc, [Fraction(0), Fraction(0), Fraction(1)])


def test_cc_additivity(interval, circle):
    rng = random.Random(5)
    for cx in (interval, circle):
        F = corpus.random_bounded_complex(cx, rng)
        G = corpus.random_bounded_complex(cx, rng)
        phi = corpus.random_morphism(F, G, rng)
        rep = cc_additivity_check(phi)
        assert rep["additive"], rep["violations"]


def test_cc_additivity_identity_cone(circle):
    F = const_complex(circle)
    rep = cc_additivity_check(SheafMorphism.identity(F))
    assert rep["additive"]
    assert rep["cone"].is_zero()


def test_cc_cohomology_decomposition(interval, circle):
    rng = random.Random(6)
    for cx in (interval, circle):
        F = corpus.random_bounded_complex(cx, rng)
        rep = cc_cohomology_decomposition_check(F)
        assert rep["equal"], rep["violations"]


def test_cc_locality(octahedron):
    # multiplicities at a vertex only depend on the closed star
    F = extension_by_zero(CellRegion(octahedron, octahedron.star((4,)), "open"))
    sub = octahedron.subcomplex(octahedron.closed_star((4,)))
    Fsub = F.restrict(sub.cells)
    Fsub = SheafComplex(CellSpace(sub), {k: CellularSheaf(CellSpace(sub), s.dims, s.restrictions)
                                         for k, s in Fsub.sheaves.items()},
                        Fsub.differentials)
    for ch in chambers(octahedron, (4,)):
        sub_ch = None
        for c2 in chambers(sub, (4,)):
            if c2.signs == ch.signs:
                sub_ch = c2
                break
        assert sub_ch is not None
        assert microlocal_multiplicity(F, (4,), ch) == \
            microlocal_multiplicity(Fsub, (4,), sub_ch)


def test_multiplicity_invariant_under_refinement(interval, circle):
    rng = random.Random(40)
    for cx in (interval, circle):
        F = const_complex(cx)
        bary, bmap = barycentric_subdivision(cx)
        Fb = pullback_refinement(bmap, F)
        for v in cx.cells_of_dim(0):
            for ch in chambers(cx, v):
                m0 = microlocal_multiplicity(F, v, ch)
                ch_b = None
                for cb in chambers(bary, v):
                    try:
                        if chamber_of(bary, v, ch.witness) == cb.signs:
                            ch_b = cb
                            break
                    except GenericityError:
                        break
                if ch_b is None:
                    continue
                assert microlocal_multiplicity(Fb, v, ch_b) == m0, (v, ch.signs)


def test_external_multiplicativity(interval):
    rng = random.Random(77)
    prod, p1, p2 = staircase_product(interval, interval)
    F = const_complex(interval)
    G = const_complex(interval)
    rep = external_multiplicativity(F, G, prod, p1, p2, rng, samples=4)
    assert rep["multiplicative"], rep["samples"]


def test_external_multiplicativity_corner(interval):
    # at the corner vertex pair the product multiplicity is the product of
    # the endpoint multiplicities
    prod, p1, p2 = staircase_product(interval, interval)
    F = const_complex(interval)
    big = const_complex(prod)
    xi = [Fraction(1)]
    corner = None
    for v in prod.cells_of_dim(0):
        if p1.vertex_map[v[0]] == 0 and p2.vertex_map[v[0]] == 0:
            corner = v
            break
    from cellsheaf.microlocal import _multiplicity_at
    m1 = _multiplicity_at(F, (0,), xi)
    mp = _multiplicity_at(big, corner, [Fraction(1), Fraction(1)])
    assert mp == m1 * m1 == 1
