"""Shared fixtures and independent oracles for the test suite.

The oracles deliberately avoid the code paths they check: global cohomology
is recomputed from the signed cellular cochain complex, Euler
characteristics of derived sections from the duality formula on local Euler
characteristics, and chamber counts from exhaustive sign-vector feasibility.
"""

import random
from fractions import Fraction

import pytest

from cellsheaf.complexes import faces_of
from cellsheaf.linalg import RationalMatrix, SpaceComplex, feasible_strict
from cellsheaf import corpus


# -- independent oracles -------------------------------------------------------


def cochain_cohomology_oracle(F):
    """Hypercohomology of a full compact complex via signed cellular cochains.

    Degree n collects F^p(s) over dim s + p = n; the differential combines
    incidence-signed restrictions with (-1)^{dim s} times the internal
    differential.  Independent of the injective-resolution machinery.
    """
    cx = F.space.complex
    assert F.space.is_full()
    blocks = {}
    for s in cx.sorted_cells():
        for p in F.degrees():
            d = F.dim(p, s)
            if d:
                blocks.setdefault(len(s) - 1 + p, []).append((s, p, d))
    offs = {}
    dims = {}
    for n, lst in blocks.items():
        off = 0
        for (s, p, d) in lst:
            offs[(n, s, p)] = off
            off += d
        dims[n] = off
    diffs = {}
    for n in sorted(blocks):
        if n + 1 not in blocks:
            continue
        mat = RationalMatrix.zero(dims[n + 1], dims[n])
        for (s, p, d) in blocks[n]:
            coff = offs[(n, s, p)]
            for (t, sign) in [(t, sg) for t in cx.cofacets(s) for (f, sg) in cx.facets(t) if f == s]:
                if (n + 1, t, p) in offs:
                    blk = F.sheaf(p).restriction_step(s, t)
                    if sign < 0:
                        blk = blk.scale(-1)
                    _ins(mat, offs[(n + 1, t, p)], coff, blk)
            if (n + 1, s, p + 1) in offs:
                blk = F.diff_at(p, s)
                if (len(s) - 1) % 2:
                    blk = blk.scale(-1)
                _ins(mat, offs[(n + 1, s, p + 1)], coff, blk)
        diffs[n] = mat
    return SpaceComplex(dims, diffs, check=True).cohomology()


def _ins(m, r0, c0, block):
    for i in range(block.rows):
        for j in range(block.cols):
            if block.data[i][j]:
                m.data[r0 + i][c0 + j] = block.data[i][j]


def chi_sections_oracle(chi_fn, open_cells):
    """Euler characteristic of derived sections over an open region, by duality.

    chi(U, F) equals the compactly supported Euler integral of the dual's
    local Euler characteristic, which unwinds to the double sum below over
    the region's own face poset.
    """
    open_cells = frozenset(open_cells)
    total = 0
    for s in open_cells:
        inner = 0
        sset = set(s)
        for t in open_cells:
            if sset <= set(t):
                inner += (-1) ** (len(t) - 1) * chi_fn[t]
        total += (-1) ** (len(s) - 1) * inner
    return total


def chamber_count_oracle(cx, cell):
    """Exhaustive sign-vector feasibility count for the conormal arrangement."""
    from cellsheaf.microlocal import _conormal_basis
    link = cx.link_vertices(cell)
    if not link:
        return 1
    basis = _conormal_basis(cx, cell)
    p = cx.coordinates[cell[0]]
    arr = []
    for w in link:
        d = [cx.coordinates[w][i] - p[i] for i in range(cx.ambient_dim)]
        arr.append([sum(b[i] * d[i] for i in range(cx.ambient_dim)) for b in basis])
    count = 0
    for mask in range(2 ** len(link)):
        signs = [1 if mask & (1 << i) else -1 for i in range(len(link))]
        rows = [[s * x for x in a] for s, a in zip(signs, arr)]
        if feasible_strict(rows) is not None:
            count += 1
    return count


def brute_rank(mat):
    """Rank by Fraction Gaussian elimination (independent of Bareiss)."""
    m = [row[:] for row in mat.data]
    rank = 0
    rows, cols = mat.rows, mat.cols
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if m[i][c]:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(rows):
            if i != r and m[i][c]:
                f = m[i][c] / m[r][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        rank += 1
    return rank


# -- fixtures -------------------------------------------------------------------


@pytest.fixture(scope="session")
def interval():
    return corpus.interval()


@pytest.fixture(scope="session")
def subdivided_interval():
    return corpus.subdivided_interval()


@pytest.fixture(scope="session")
def circle():
    return corpus.circle()


@pytest.fixture(scope="session")
def octahedron():
    return corpus.octahedron()


@pytest.fixture(scope="session")
def torus():
    return corpus.staircase_torus()


@pytest.fixture(scope="session")
def corpus_items(interval, subdivided_interval, circle, octahedron, torus):
    return {
        "interval": interval,
        "subdivided_interval": subdivided_interval,
        "circle": circle,
        "mobius_circle": circle,
        "octahedron": octahedron,
        "hemisphere_sphere": octahedron,
        "staircase_torus": torus,
    }


@pytest.fixture(scope="session")
def corpus_sheaves(corpus_items):
    rng = random.Random(20240817)
    out = {}
    for name, cx in corpus_items.items():
        out[name] = corpus.bundled_sheaves(name, cx, rng)
    return out


@pytest.fixture(scope="session")
def cycle_cache():
    """Session cache of characteristic cycles keyed by (item, label)."""
    return {}


def cached_cycle(cycle_cache, name, label, F):
    from cellsheaf.microlocal import characteristic_cycle
    key = (name, label)
    if key not in cycle_cache:
        cycle_cache[key] = characteristic_cycle(F)
    return cycle_cache[key]
