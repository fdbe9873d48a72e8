import random
from fractions import Fraction

import pytest

from cellsheaf.complexes import CellRegion
from cellsheaf.linalg import RationalMatrix
from cellsheaf.sheaves import (CellSpace, CellularSheaf, ConstructibleFunction,
                               SheafComplex, SheafMorphism,
                               SheafValidationError, chi_local,
                               cohomology_sheaves, extension_by_zero,
                               hom_space_basis, local_system, mapping_cone,
                               tensor_complexes)
from cellsheaf import corpus


def const_complex(cx, rank=1):
    return SheafComplex.from_sheaf(CellularSheaf.constant(CellSpace(cx), rank))


def test_validate_constant(interval):
    const_complex(interval).validate()


def test_validate_dim_mismatch(interval):
    sp = CellSpace(interval)
    dims = {(0,): 1, (1,): 1, (0, 1): 2}
    rest = {((0,), (0, 1)): RationalMatrix.identity(1),
            ((1,), (0, 1)): RationalMatrix.identity(1)}
    sheaf = CellularSheaf(sp, dims, rest)
    with pytest.raises(SheafValidationError):
        sheaf.validate()


def test_validate_random_rank2_octahedron(octahedron):
    rng = random.Random(4)
    F = corpus.random_bounded_complex(octahedron, rng, max_rank=2)
    F.validate()


def test_extension_by_zero_open_edge(interval):
    U = CellRegion(interval, [(0, 1)])
    F = extension_by_zero(U)
    assert F.dim(0, (0,)) == 0
    assert F.dim(0, (1,)) == 0
    assert F.dim(0, (0, 1)) == 1


def test_extension_whole_complex_is_constant(interval):
    F = extension_by_zero(CellRegion(interval, interval.cells))
    assert all(F.dim(0, c) == 1 for c in interval.cells)


def test_extension_closed_equator(octahedron):
    eq = corpus.equator_cells(octahedron)
    F = extension_by_zero(CellRegion(octahedron, eq, "closed"))
    F.validate()
    assert all(F.dim(0, c) == (1 if c in eq else 0) for c in octahedron.cells)


def test_extension_rejects_bad_region(octahedron):
    with pytest.raises(ValueError):
        extension_by_zero(CellRegion(octahedron, [(0,), (0, 2, 4)]))


def test_local_system_trivial_is_constant(circle):
    ls = local_system(circle, 1, {})
    for f, c in CellSpace(circle).face_pairs():
        assert ls.restriction_step(f, c) == RationalMatrix.identity(1)


def test_local_system_rejects_singular(circle):
    with pytest.raises(SheafValidationError):
        local_system(circle, 1, {(0, 1): [[0]]})


def test_local_system_detection(circle, interval):
    ls = SheafComplex.from_sheaf(local_system(circle, 1, {(0, 1): [[-1]]}))
    assert ls.is_local_system()
    U = CellRegion(interval, [(0, 1)])
    assert not extension_by_zero(U).is_local_system()


def test_shift_and_chi(interval):
    F = const_complex(interval)
    G = F.shift(1)
    assert chi_local(G) == chi_local(F).scale(-1)
    assert G.dim(-1, (0,)) == 1


def test_cone_of_identity_acyclic(interval):
    F = const_complex(interval)
    cone_c, incl, proj = mapping_cone(SheafMorphism.identity(F))
    cone_c.validate()
    incl.validate()
    proj.validate()
    assert all(cone_c.stalk_cohomology(c) == {} for c in interval.cells)


def test_cone_of_zero_map(interval):
    F = const_complex(interval)
    z = SheafComplex.zero(F.space)
    cone_c, _, _ = mapping_cone(SheafMorphism.zero(z, F))
    assert all(cone_c.stalk_cohomology(c) == F.stalk_cohomology(c)
               for c in interval.cells)


def test_cone_open_to_constant(interval):
    U = CellRegion(interval, [(0, 1)])
    j = extension_by_zero(U)
    F = const_complex(interval)
    basis = hom_space_basis(j, F)
    assert len(basis) == 1
    cone_c, _, _ = mapping_cone(basis[0])
    assert cone_c.stalk_cohomology((0,)) == {0: 1}
    assert cone_c.stalk_cohomology((1,)) == {0: 1}
    assert cone_c.stalk_cohomology((0, 1)) == {}
    # chi additivity on the cone
    assert chi_local(cone_c) == chi_local(F) - chi_local(j)


def test_chi_indicator(interval):
    U = CellRegion(interval, [(0, 1)])
    assert chi_local(extension_by_zero(U)) == \
        ConstructibleFunction.indicator(interval, [(0, 1)])


def test_chi_factors_through_cohomology(octahedron):
    rng = random.Random(12)
    F = corpus.random_bounded_complex(octahedron, rng)
    hs, _ = cohomology_sheaves(F)
    total = ConstructibleFunction(octahedron)
    for k, sheaf in hs.items():
        total = total + chi_local(SheafComplex.from_sheaf(sheaf)).scale((-1) ** k)
    assert total == chi_local(F)


def test_tensor_unit(circle):
    F = SheafComplex.from_sheaf(local_system(circle, 1, {(0, 1): [[-1]]}))
    unit = const_complex(circle)
    T = tensor_complexes(F, unit)
    for c in circle.cells:
        assert T.stalk_cohomology(c) == F.stalk_cohomology(c)
    for f, c in F.space.face_pairs():
        assert T.sheaf(0).restriction_step(f, c) == F.sheaf(0).restriction_step(f, c)


def test_tensor_monodromy_squares(circle):
    ls = SheafComplex.from_sheaf(local_system(circle, 1, {(0, 1): [[-1]]}))
    sq = tensor_complexes(ls, ls)
    for f, c in sq.space.face_pairs():
        assert sq.sheaf(0).restriction_step(f, c) == RationalMatrix.identity(1)


def test_tensor_disjoint_supports_vanish(octahedron):
    eq = corpus.equator_cells(octahedron)
    north = CellRegion(octahedron, octahedron.star((4,)), "open")
    F = extension_by_zero(north)
    G = extension_by_zero(CellRegion(octahedron, eq, "closed"))
    T = tensor_complexes(F, G)
    assert T.is_zero()


def test_cohomology_sheaves_of_cone(interval):
    U = CellRegion(interval, [(0, 1)])
    j = extension_by_zero(U)
    F = const_complex(interval)
    cone_c, _, _ = mapping_cone(hom_space_basis(j, F)[0])
    hs, _ = cohomology_sheaves(cone_c)
    assert set(hs) == {0}
    sky = hs[0]
    assert sky.dim((0,)) == 1 and sky.dim((1,)) == 1 and sky.dim((0, 1)) == 0


def test_restrict_to_open(circle):
    F = const_complex(circle)
    star = circle.star((0,))
    G = F.restrict(star)
    G.validate()
    assert set(G.space.cells) == set(star)
