import random
from fractions import Fraction

import pytest

from cellsheaf.linalg import (RationalMatrix, SpaceComplex, SpaceMap, cone,
                              column_matrix, feasible_strict, total_complex)
from conftest import brute_rank


def test_rank_and_kernel_small():
    m = RationalMatrix.from_rows([[1, 2, 3], [2, 4, 6], [0, 1, 1]])
    assert m.rank() == 2
    ker = m.kernel_basis()
    assert len(ker) == 1
    assert all(x == 0 for x in m.apply(ker[0]))


def test_rank_matches_fraction_gauss_randomized():
    rng = random.Random(1)
    for _ in range(60):
        r = rng.randint(1, 6)
        c = rng.randint(1, 6)
        m = RationalMatrix.from_rows(
            [[Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(c)]
             for _ in range(r)])
        assert m.rank() == brute_rank(m)


def test_rank_nullity():
    rng = random.Random(2)
    for _ in range(40):
        r, c = rng.randint(1, 5), rng.randint(1, 5)
        m = RationalMatrix.from_rows(
            [[rng.randint(-3, 3) for _ in range(c)] for _ in range(r)])
        assert m.rank() + len(m.kernel_basis()) == c


def test_solve():
    m = RationalMatrix.from_rows([[2, 0], [0, 3]])
    x = m.solve([Fraction(1), Fraction(1)])
    assert x == [Fraction(1, 2), Fraction(1, 3)]
    inconsistent = RationalMatrix.from_rows([[1, 0], [1, 0]])
    assert inconsistent.solve([Fraction(0), Fraction(1)]) is None


def test_cohomology_identity_complex():
    # 0 -> Q --id--> Q -> 0 is acyclic
    sc = SpaceComplex({0: 1, 1: 1}, {0: RationalMatrix.identity(1)})
    assert sc.cohomology() == {}


def test_cohomology_zero_differentials():
    sc = SpaceComplex({0: 2, 1: 3, 5: 1}, {})
    assert sc.cohomology() == {0: 2, 1: 3, 5: 1}


def test_shift_signs():
    d = RationalMatrix.from_rows([[1], [2]])
    sc = SpaceComplex({0: 1, 1: 2}, {0: d})
    sh = sc.shift(1)
    assert sh.dims == {-1: 1, 0: 2}
    assert sh.diff(-1).data[0][0] == -1
    assert sc.shift(2).diff(-2).data[0][0] == 1


def test_cone_of_identity_acyclic():
    sc = SpaceComplex({0: 2}, {})
    f = SpaceMap(sc, sc, {0: RationalMatrix.identity(2)})
    c, _ = cone(f)
    assert c.cohomology() == {}


def test_total_complex_single_row():
    d = RationalMatrix.from_rows([[1, 0]])
    dims = {(0, 0): 2, (1, 0): 1}
    tc, _ = total_complex(dims, {(0, 0): d}, {})
    assert tc.cohomology() == {0: 1}


def test_total_complex_zero_grid():
    dims = {(p, q): 1 for p in range(3) for q in range(3)}
    tc, _ = total_complex(dims, {}, {})
    assert tc.cohomology() == {0: 1, 1: 2, 2: 3, 3: 2, 4: 1}


def test_total_complex_two_rows_is_cone_like():
    # two rows connected by an identity: acyclic total complex
    dims = {(0, 0): 1, (0, 1): 1}
    tc, _ = total_complex(dims, {}, {(0, 0): RationalMatrix.identity(1)})
    assert tc.cohomology() == {}


def test_total_complex_rejects_non_commuting():
    dims = {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1}
    horiz = {(0, 0): RationalMatrix.identity(1), (0, 1): RationalMatrix.identity(1)}
    vert = {(0, 0): RationalMatrix.identity(1),
            (1, 0): RationalMatrix.from_rows([[2]])}
    with pytest.raises(ValueError):
        total_complex(dims, horiz, vert)


def test_feasible_strict_witnesses_randomized():
    rng = random.Random(3)
    for _ in range(200):
        d = rng.choice([1, 2, 3, 4])
        rows = [[Fraction(rng.randint(-3, 3)) for _ in range(d)]
                for _ in range(rng.randint(1, 5))]
        w = feasible_strict(rows)
        if w is not None:
            assert all(sum(a * y for a, y in zip(r, w)) > 0 for r in rows)
        else:
            for _ in range(200):
                y = [Fraction(rng.randint(-15, 15)) for _ in range(d)]
                assert not all(sum(a * b for a, b in zip(r, y)) > 0 for r in rows)


def test_feasible_strict_with_equalities():
    w = feasible_strict([[1, 0, 0], [0, 1, 0]], [[0, 0, 1]])
    assert w is not None and w[2] == 0 and w[0] > 0 and w[1] > 0


def test_feasible_strict_antipodal_infeasible():
    assert feasible_strict([[1, 2], [-1, -2]]) is None
