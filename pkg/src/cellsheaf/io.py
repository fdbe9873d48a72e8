"""Serialization: complexes, sheaves, cycles and functions as structured text.

Rationals travel as "p/q" strings (or "p" when integral), matrices as
row-major nested lists, cells as comma-joined vertex ids.  Serialization is
deterministic (sorted keys) so identical inputs produce byte-identical
files.
"""

import json
from fractions import Fraction

from .linalg import RationalMatrix
from .complexes import SimplicialComplex, build_complex
from .sheaves import CellSpace, CellularSheaf, SheafComplex
from .microlocal import ConormalCycle


def frac_to_str(x):
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return "%d/%d" % (x.numerator, x.denominator)


def frac_from_str(s):
    return Fraction(s)


def cell_to_str(cell):
    return ",".join(str(v) for v in cell)


def cell_from_str(s):
    return tuple(sorted(int(v) for v in s.split(",")))


def matrix_to_obj(m):
    return {"rows": m.rows, "cols": m.cols,
            "entries": [[frac_to_str(x) for x in row] for row in m.data]}


def matrix_from_obj(obj):
    return RationalMatrix(obj["rows"], obj["cols"],
                          [[Fraction(x) for x in row] for row in obj["entries"]])


def covector_from_str(s):
    """Parse "1,0,-1/2" or a JSON list into a rational covector."""
    s = s.strip()
    if s.startswith("["):
        return [Fraction(str(x)) for x in json.loads(s)]
    return [Fraction(part.strip()) for part in s.split(",")]


# -- complexes -----------------------------------------------------------------


def complex_to_obj(cx):
    return {
        "ambient_dim": cx.ambient_dim,
        "vertices": {str(v): [frac_to_str(x) for x in p]
                     for v, p in sorted(cx.coordinates.items())},
        "maximal_cells": [list(c) for c in cx.maximal_cells()],
    }


def complex_from_obj(obj, check_embedding=True):
    coords = {int(v): [Fraction(x) for x in p] for v, p in obj["vertices"].items()}
    return build_complex(coords, obj["maximal_cells"],
                         ambient_dim=obj["ambient_dim"],
                         check_embedding=check_embedding)


def save_complex(cx, path):
    _dump(complex_to_obj(cx), path)


def load_complex(path, check_embedding=True):
    return complex_from_obj(_load(path), check_embedding=check_embedding)


# -- sheaf complexes -------------------------------------------------------------


def sheaf_to_obj(F, complex_ref=None):
    degrees = {}
    for k in F.degrees():
        s = F.sheaf(k)
        degrees[str(k)] = {
            "stalks": {cell_to_str(c): d for c, d in sorted(s.dims.items())},
            "restrictions": {
                "%s<%s" % (cell_to_str(f), cell_to_str(c)): matrix_to_obj(m)
                for (f, c), m in sorted(s.restrictions.items())
            },
        }
    diffs = {}
    for k, comp in sorted(F.differentials.items()):
        diffs[str(k)] = {cell_to_str(c): matrix_to_obj(m)
                         for c, m in sorted(comp.items())}
    obj = {"complex": complex_ref or "inline", "degrees": degrees,
           "differentials": diffs}
    if F.space.cells != F.space.complex.cells:
        obj["support"] = sorted(cell_to_str(c) for c in F.space.cells)
    return obj


def sheaf_from_obj(obj, cx):
    cells = None
    if "support" in obj:
        cells = frozenset(cell_from_str(s) for s in obj["support"])
    space = CellSpace(cx, cells)
    sheaves = {}
    for k, data in obj["degrees"].items():
        dims = {cell_from_str(c): int(d) for c, d in data["stalks"].items()}
        rest = {}
        for key, m in data.get("restrictions", {}).items():
            f, c = key.split("<")
            rest[(cell_from_str(f), cell_from_str(c))] = matrix_from_obj(m)
        sheaves[int(k)] = CellularSheaf(space, dims, rest)
    diffs = {}
    for k, comp in obj.get("differentials", {}).items():
        diffs[int(k)] = {cell_from_str(c): matrix_from_obj(m) for c, m in comp.items()}
    return SheafComplex(space, sheaves, diffs)


def save_sheaf(F, path, complex_ref=None):
    _dump(sheaf_to_obj(F, complex_ref), path)


def load_sheaf(path, cx):
    return sheaf_from_obj(_load(path), cx)


# -- constructible functions ------------------------------------------------------


def function_to_obj(phi):
    return {cell_to_str(c): v for c, v in sorted(phi.values.items())}


def function_from_obj(obj, cx):
    from .sheaves import ConstructibleFunction
    return ConstructibleFunction(cx, {cell_from_str(c): int(v) for c, v in obj.items()})


# -- conormal cycles ---------------------------------------------------------------


def cycle_to_obj(cycle):
    entries = []
    for (cell, signs), m in cycle.entries():
        link = cycle.complex.link_vertices(cell)
        wit = cycle.witnesses.get((cell, signs))
        entries.append({
            "cell": list(cell),
            "signs": {str(w): ("+" if s > 0 else "-") for w, s in zip(link, signs)},
            "witness": [frac_to_str(x) for x in (wit or [])],
            "multiplicity": m,
        })
    return {"entries": entries}


def cycle_from_obj(obj, cx):
    mult = {}
    wit = {}
    for e in obj["entries"]:
        cell = tuple(sorted(e["cell"]))
        link = cx.link_vertices(cell)
        signs = tuple(1 if e["signs"][str(w)] == "+" else -1 for w in link)
        mult[(cell, signs)] = int(e["multiplicity"])
        if e.get("witness"):
            wit[(cell, signs)] = tuple(Fraction(x) for x in e["witness"])
    return ConormalCycle(cx, mult, wit)


def save_cycle(cycle, path):
    _dump(cycle_to_obj(cycle), path)


def load_cycle(path, cx):
    return cycle_from_obj(_load(path), cx)


# -- graded dimension tables ---------------------------------------------------------


def dims_to_obj(dims):
    return {str(k): v for k, v in sorted(dims.items())}


def _dump(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _load(path):
    with open(path) as fh:
        return json.load(fh)


def dumps(obj):
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"
