"""Euler-characteristic calculus for constructible data.

The integral of a constructible function against the compactly supported
Euler characteristic is the signed sum of its cell values; pushforward of
functions integrates over point fibers.  Together with the local Euler
characteristic of a sheaf complex this realizes the computable direction of
the dictionary between the Grothendieck group of sheaf complexes and
constructible functions.
"""

from .complexes import CellRegion
from .functors import derived_sections, derived_sections_compact
from .sheaves import ConstructibleFunction, chi_local


def euler_global(F, check=True):
    """Alternating sum of global cohomology dimensions."""
    return sum((-1) ** k * d for k, d in derived_sections(F, None, check=check).items())


def euler_global_compact(F, check=True):
    """Alternating sum of compactly supported cohomology dimensions."""
    return sum((-1) ** k * d
               for k, d in derived_sections_compact(F, None, check=check).items())


def euler_integral(phi):
    """Integral against the compactly supported Euler characteristic.

    For a function with value phi(s) on each open cell s this is the sum of
    (-1)^(dim s) phi(s).
    """
    return sum((-1) ** (len(c) - 1) * v for c, v in phi.values.items())


def pushforward_function(f, phi):
    """Fiberwise Euler integral of a constructible function along a map.

    The fiber over a point of an open target cell meets each source cell
    mapping onto that cell in an open polytope of the complementary
    dimension, so the integral needs no geometric refinement: each such cell
    contributes (-1)^(dim fiber slice) times its value.
    """
    out = {}
    for y in f.target.cells:
        total = 0
        for c in f.fiber_cells(y):
            total += (-1) ** (len(c) - len(y)) * phi[c]
        if total:
            out[y] = total
    return ConstructibleFunction(f.target, out)


def euler_integral_over(phi, cells):
    """Euler integral of the restriction to a cell subset."""
    return sum((-1) ** (len(c) - 1) * v for c, v in phi.values.items() if c in cells)
