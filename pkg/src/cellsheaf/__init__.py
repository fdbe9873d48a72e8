"""Exact-arithmetic engine for cellular constructible sheaves.

Finite simplicial complexes with rational coordinates carry cellular sheaves
(stalk spaces on open cells, restriction maps along face relations).  This
package computes their derived functors -- sections, direct and inverse
images with and without proper supports, Verdier duality, hyperext, local
cohomology -- together with the Euler calculus of constructible functions
and characteristic cycles with their index pairing, all over the rationals
with no floating point.
"""

from .complexes import (CellRegion, SimplicialComplex, SimplicialMap,
                        barycentric_subdivision, build_complex, point_complex,
                        staircase_product, star_link, subdivide_along_level)
from .linalg import RationalMatrix, SpaceComplex
from .sheaves import (CellSpace, CellularSheaf, ConstructibleFunction,
                      SheafComplex, SheafMorphism, chi_local, cohomology_sheaves,
                      extension_by_zero, local_system, mapping_cone,
                      tensor_complexes)
from .functors import (base_change_point_fiber, derived_sections,
                       derived_sections_compact, dualizing_complex, hyperext,
                       injective_resolution, local_cohomology, pullback,
                       pushforward_derived, pushforward_open_region,
                       pushforward_proper, upper_shriek, verdier_dual)
from .euler import (euler_global, euler_global_compact, euler_integral,
                    pushforward_function)
from .microlocal import (ConormalChamber, ConormalCycle, GenericityError,
                         chambers, characteristic_cycle, cc_additivity_check,
                         cc_pushforward_closed, external_multiplicativity,
                         index_pairing, microlocal_multiplicity)

__version__ = "0.1.0"
