"""Batch command line: load complexes and sheaves, run operations, verify.

Exit codes: 0 success, 1 invariant violation, 2 usage error, 3 covector not
generic (so scripts can redraw).  Reports are JSON on stdout; a short human
summary goes to stderr.  The corpus directory for ``verify``/``corpus`` can
be overridden with the CELLSHEAF_CORPUS environment variable.
"""

import argparse
import json
import os
import random
import sys
import time

from . import corpus as corpus_mod
from . import io as cio
from .complexes import CellRegion
from .euler import euler_global, euler_global_compact, euler_integral
from .functors import (derived_sections, derived_sections_compact, hyperext,
                       local_cohomology, pullback, pushforward_derived,
                       pushforward_proper, verdier_dual)
from .microlocal import (GenericityError, characteristic_cycle,
                         generic_covector, index_pairing)
from .sheaves import SheafValidationError, chi_local
from .complexes import SimplicialMap


EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_GENERICITY = 3


def _emit(obj, summary=None):
    sys.stdout.write(cio.dumps(obj))
    if summary:
        sys.stderr.write(summary + "\n")


def _load_pair(args):
    cx = cio.load_complex(args.complex)
    F = cio.load_sheaf(args.sheaf, cx)
    return cx, F


def cmd_validate(args):
    cx = cio.load_complex(args.complex)
    report = {"complex": "ok", "cells": len(cx.cells)}
    if args.sheaf:
        F = cio.load_sheaf(args.sheaf, cx)
        F.validate()
        report["sheaf"] = "ok"
        report["total_stalk_dim"] = F.total_stalk_dim()
    _emit(report, "valid")
    return EXIT_OK


def cmd_cohomology(args):
    cx, F = _load_pair(args)
    if args.region:
        region = CellRegion(cx, [cio.cell_from_str(s) for s in json.loads(args.region)], "open")
        dims = derived_sections(F, region)
    else:
        dims = derived_sections(F)
    _emit({"cohomology": cio.dims_to_obj(dims)}, "H* = %r" % (dims,))
    return EXIT_OK


def cmd_cohomology_c(args):
    cx, F = _load_pair(args)
    dims = derived_sections_compact(F)
    _emit({"compact_cohomology": cio.dims_to_obj(dims)}, "Hc* = %r" % (dims,))
    return EXIT_OK


def cmd_dual(args):
    cx, F = _load_pair(args)
    D = verdier_dual(F)
    obj = cio.sheaf_to_obj(D, complex_ref=os.path.basename(args.complex))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(cio.dumps(obj))
        _emit({"written": args.out}, "dual written")
    else:
        _emit(obj)
    return EXIT_OK


def cmd_ext(args):
    cx = cio.load_complex(args.complex)
    F = cio.load_sheaf(args.sheaf_a, cx)
    G = cio.load_sheaf(args.sheaf_b, cx)
    dims = hyperext(F, G)
    _emit({"ext": cio.dims_to_obj(dims)}, "Ext = %r" % (dims,))
    return EXIT_OK


def cmd_local_cohomology(args):
    cx, F = _load_pair(args)
    cells = [cio.cell_from_str(s) for s in json.loads(args.region)]
    region = CellRegion(cx, cells, "locally_closed")
    dims = local_cohomology(region, F)
    _emit({"local_cohomology": cio.dims_to_obj(dims)}, "H_Z = %r" % (dims,))
    return EXIT_OK


def _load_map(args, source, target):
    with open(args.map) as fh:
        vm = {int(k): int(v) for k, v in json.load(fh).items()}
    return SimplicialMap(source, target, vm)


def cmd_pushforward(args):
    cx, F = _load_pair(args)
    target = cio.load_complex(args.target_complex)
    f = _load_map(args, cx, target)
    G = pushforward_proper(f, F) if args.proper else pushforward_derived(f, F)
    _emit(cio.sheaf_to_obj(G, complex_ref=os.path.basename(args.target_complex)),
          "pushforward computed")
    return EXIT_OK


def cmd_pullback(args):
    target = cio.load_complex(args.complex)
    source = cio.load_complex(args.source_complex)
    G = cio.load_sheaf(args.sheaf, target)
    f = _load_map(args, source, target)
    F = pullback(f, G)
    _emit(cio.sheaf_to_obj(F, complex_ref=os.path.basename(args.source_complex)),
          "pullback computed")
    return EXIT_OK


def cmd_euler(args):
    cx, F = _load_pair(args)
    chi = chi_local(F)
    report = {
        "euler_global": euler_global(F),
        "euler_global_compact": euler_global_compact(F),
        "euler_integral_of_local": euler_integral(chi),
        "local": cio.function_to_obj(chi),
    }
    _emit(report, "chi = %d" % report["euler_global"])
    return EXIT_OK


def cmd_cc(args):
    cx, F = _load_pair(args)
    cyc = characteristic_cycle(F)
    obj = cio.cycle_to_obj(cyc)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(cio.dumps(obj))
        _emit({"written": args.out, "entries": len(cyc.m)}, "cycle written")
    else:
        _emit(obj, "%d nonzero entries" % len(cyc.m))
    return EXIT_OK


def cmd_pair(args):
    cx = cio.load_complex(args.complex)
    cyc = cio.load_cycle(args.cycle, cx)
    xi = cio.covector_from_str(args.covector)
    value = index_pairing(cyc, xi)
    _emit({"pairing": value}, "pairing = %d" % value)
    return EXIT_OK


def cmd_corpus(args):
    outdir = args.out_dir or os.environ.get("CELLSHEAF_CORPUS", "corpus")
    os.makedirs(outdir, exist_ok=True)
    rng = random.Random(args.seed)
    written = []
    for name in corpus_mod.item_names():
        cx = corpus_mod.build_item(name)
        cpath = os.path.join(outdir, "%s.complex.json" % name)
        cio.save_complex(cx, cpath)
        written.append(cpath)
        for label, F in corpus_mod.bundled_sheaves(name, cx, rng):
            spath = os.path.join(outdir, "%s.%s.sheaf.json" % (name, label))
            cio.save_sheaf(F, spath, complex_ref=os.path.basename(cpath))
            written.append(spath)
    _emit({"written": written}, "%d files" % len(written))
    return EXIT_OK


def cmd_verify(args):
    name = args.item
    rng = random.Random(args.seed)
    t0 = time.time()
    cx = corpus_mod.build_item(name)
    checks = []

    def record(label, ok, detail=""):
        checks.append({"check": label, "ok": bool(ok), "detail": detail})

    record("face_closure", all(
        all(f in cx.cells for f, _ in cx.facets(c)) for c in cx.cells))
    from .linalg import RationalMatrix
    dd_ok = True
    for k in range(1, (cx.dimension or 0) + 1):
        if k >= 2:
            if not (cx.boundary_matrix(k - 1) * cx.boundary_matrix(k)).is_zero():
                dd_ok = False
    record("boundary_squares_to_zero", dd_ok)
    sheaves = corpus_mod.bundled_sheaves(name, cx, rng)
    for label, F in sheaves:
        try:
            F.validate()
            record("validate:%s" % label, True)
        except SheafValidationError as e:
            record("validate:%s" % label, False, str(e))
            continue
        chi_fn = chi_local(F)
        chi_int = euler_integral(chi_fn)
        chi_c = euler_global_compact(F)
        record("euler_integral_matches_compact_cohomology:%s" % label,
               chi_int == chi_c, "%d vs %d" % (chi_int, chi_c))
        cyc = characteristic_cycle(F)
        chi_g = euler_global(F)
        ok = True
        for _ in range(args.covectors):
            xi = generic_covector(cx, rng)
            if index_pairing(cyc, xi) != chi_g:
                ok = False
        record("index_theorem:%s" % label, ok)
    elapsed = time.time() - t0
    failed = [c for c in checks if not c["ok"]]
    report = {"item": name, "seed": args.seed, "checks": checks,
              "elapsed_seconds": round(elapsed, 3), "ok": not failed}
    _emit(report, "%s: %d checks, %d failed (seed %d)"
          % (name, len(checks), len(failed), args.seed))
    return EXIT_OK if not failed else EXIT_VIOLATION


def build_parser():
    ap = argparse.ArgumentParser(
        prog="cellsheaf",
        description="Exact computations with cellular sheaves: cohomology, "
                    "duality, Euler calculus and characteristic cycles.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        p = sub.add_parser(name, **kw)
        p.set_defaults(fn=fn)
        return p

    p = add("validate", cmd_validate, help="validate a complex and optional sheaf")
    p.add_argument("--complex", required=True)
    p.add_argument("--sheaf")

    p = add("cohomology", cmd_cohomology, help="derived sections over X or an open region")
    p.add_argument("--complex", required=True)
    p.add_argument("--sheaf", required=True)
    p.add_argument("--region", help='JSON list of cells like ["0,1", "1"]')

    p = add("cohomology-c", cmd_cohomology_c, help="compactly supported cohomology")
    p.add_argument("--complex", required=True)
    p.add_argument("--sheaf", required=True)

    p = add("dual", cmd_dual, help="Verdier dual")
    p.add_argument("--complex", required=True)
    p.add_argument("--sheaf", required=True)
    p.add_argument("--out")

    p = add("ext", cmd_ext, help="hyperext dimensions between two sheaves")
    p.add_argument("--complex", required=True)
    p.add_argument("--sheaf-a", required=True)
    p.add_argument("--sheaf-b", required=True)

    p = add("local-cohomology", cmd_local_cohomology,
            help="cohomology supported in a locally closed region")
    p.add_argument("--complex", required=True)
    p.add_argument("--sheaf", required=True)
    p.add_argument("--region", required=True)

    p = add("pushforward", cmd_pushforward, help="derived direct image along a map")
    p.add_argument("--complex", required=True)
    p.add_argument("--sheaf", required=True)
    p.add_argument("--target-complex", required=True)
    p.add_argument("--map", required=True, help="JSON vertex map source -> target")
    p.add_argument("--proper", action="store_true")

    p = add("pullback", cmd_pullback, help="inverse image along a map")
    p.add_argument("--complex", required=True, help="target complex (sheaf lives here)")
    p.add_argument("--sheaf", required=True)
    p.add_argument("--source-complex", required=True)
    p.add_argument("--map", required=True)

    p = add("euler", cmd_euler, help="global and local Euler characteristics")
    p.add_argument("--complex", required=True)
    p.add_argument("--sheaf", required=True)

    p = add("cc", cmd_cc, help="characteristic cycle of a sheaf complex")
    p.add_argument("--complex", required=True)
    p.add_argument("--sheaf", required=True)
    p.add_argument("--out")

    p = add("pair", cmd_pair, help="index pairing of a cycle with a covector")
    p.add_argument("--cycle", required=True)
    p.add_argument("--complex", required=True)
    p.add_argument("--covector", required=True, help='rational covector "1,0,-1/2"')

    p = add("verify", cmd_verify, help="run the invariant suite on a corpus item")
    p.add_argument("item", choices=corpus_mod.item_names())
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--covectors", type=int, default=8)

    p = add("corpus", cmd_corpus, help="materialize the bundled examples")
    p.add_argument("--out-dir")
    p.add_argument("--seed", type=int, default=2024)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except GenericityError as e:
        sys.stderr.write("non-generic covector: %s\n" % e)
        return EXIT_GENERICITY
    except (SheafValidationError, ValueError, KeyError) as e:
        sys.stderr.write("error: %s\n" % e)
        return EXIT_VIOLATION
    except OSError as e:
        sys.stderr.write("io error: %s\n" % e)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
