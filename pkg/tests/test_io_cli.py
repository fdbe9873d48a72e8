import json
import os
import random
import subprocess
import sys

import pytest

from cellsheaf import io as cio
from cellsheaf.cli import main
from cellsheaf.complexes import CellRegion
from cellsheaf.microlocal import characteristic_cycle
from cellsheaf.sheaves import (CellSpace, CellularSheaf, SheafComplex,
                               extension_by_zero, local_system)
from cellsheaf.functors import pushforward_open_region, verdier_dual
from cellsheaf import corpus


def const_complex(cx, rank=1):
    return SheafComplex.from_sheaf(CellularSheaf.constant(CellSpace(cx), rank))


def test_complex_round_trip(tmp_path, octahedron):
    p = tmp_path
    path = os.path.join(p, "oct.json")
    cio.save_complex(octahedron, str(path))
    loaded = cio.load_complex(str(path))
    assert loaded.cells == octahedron.cells
    assert loaded.coordinates == octahedron.coordinates


def test_sheaf_round_trip(tmp_path, circle):
    F = SheafComplex.from_sheaf(local_system(circle, 1, {(0, 1): [[-1]]}))
    path = str(tmp_path / "ls.json")
    cio.save_sheaf(F, path)
    G = cio.load_sheaf(path, circle)
    G.validate()
    assert all(G.stalk_dims(c) == F.stalk_dims(c) for c in circle.cells)
    for f, c in F.space.face_pairs():
        assert G.sheaf(0).restriction_step(f, c) == F.sheaf(0).restriction_step(f, c)


def test_dual_sheaf_round_trip(tmp_path, interval):
    D = verdier_dual(const_complex(interval))
    path = str(tmp_path / "dual.json")
    cio.save_sheaf(D, path)
    G = cio.load_sheaf(path, interval)
    G.validate()
    for c in interval.cells:
        assert G.stalk_cohomology(c) == D.stalk_cohomology(c)


def test_cycle_round_trip(tmp_path, interval):
    U = CellRegion(interval, [(0, 1)])
    inner = const_complex(interval).restrict(U.cells)
    cyc = characteristic_cycle(pushforward_open_region(U, inner))
    path = str(tmp_path / "cyc.json")
    cio.save_cycle(cyc, path)
    back = cio.load_cycle(path, interval)
    assert back == cyc


def test_serialization_deterministic(tmp_path, octahedron):
    a = cio.dumps(cio.complex_to_obj(octahedron))
    b = cio.dumps(cio.complex_to_obj(corpus.octahedron()))
    assert a == b


def test_fraction_strings():
    from fractions import Fraction
    assert cio.frac_to_str(Fraction(1, 2)) == "1/2"
    assert cio.frac_to_str(Fraction(-3)) == "-3"
    assert cio.frac_from_str("7/3") == Fraction(7, 3)


def run_cli(args):
    import io as _io
    import contextlib
    buf = _io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(args)
    return code, buf.getvalue()


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    code, _ = run_cli(["corpus", "--out-dir", str(d), "--seed", "11"])
    assert code == 0
    return str(d)


def test_cli_validate(corpus_dir):
    code, out = run_cli([
        "validate",
        "--complex", os.path.join(corpus_dir, "octahedron.complex.json"),
        "--sheaf", os.path.join(corpus_dir, "octahedron.constant.sheaf.json")])
    assert code == 0
    assert json.loads(out)["sheaf"] == "ok"


def test_cli_cohomology(corpus_dir):
    code, out = run_cli([
        "cohomology",
        "--complex", os.path.join(corpus_dir, "octahedron.complex.json"),
        "--sheaf", os.path.join(corpus_dir, "octahedron.constant.sheaf.json")])
    assert code == 0
    assert json.loads(out)["cohomology"] == {"0": 1, "2": 1}


def test_cli_cc_and_pair(corpus_dir, tmp_path):
    cyc_path = str(tmp_path / "cyc.json")
    code, _ = run_cli([
        "cc",
        "--complex", os.path.join(corpus_dir, "interval.complex.json"),
        "--sheaf", os.path.join(corpus_dir, "interval.open_pushforward.sheaf.json"),
        "--out", cyc_path])
    assert code == 0
    code, out = run_cli([
        "pair", "--cycle", cyc_path,
        "--complex", os.path.join(corpus_dir, "interval.complex.json"),
        "--covector", "1"])
    assert code == 0
    assert json.loads(out)["pairing"] == 1


def test_cli_pair_nongeneric_exit_code(corpus_dir, tmp_path):
    cyc_path = str(tmp_path / "c2.json")
    run_cli(["cc",
             "--complex", os.path.join(corpus_dir, "interval.complex.json"),
             "--sheaf", os.path.join(corpus_dir, "interval.constant.sheaf.json"),
             "--out", cyc_path])
    code, _ = run_cli([
        "pair", "--cycle", cyc_path,
        "--complex", os.path.join(corpus_dir, "interval.complex.json"),
        "--covector", "0"])
    assert code == 3


def test_cli_euler(corpus_dir):
    code, out = run_cli([
        "euler",
        "--complex", os.path.join(corpus_dir, "octahedron.complex.json"),
        "--sheaf", os.path.join(corpus_dir, "octahedron.constant.sheaf.json")])
    assert code == 0
    rep = json.loads(out)
    assert rep["euler_global"] == 2
    assert rep["euler_integral_of_local"] == 2


def test_cli_local_cohomology(corpus_dir):
    code, out = run_cli([
        "local-cohomology",
        "--complex", os.path.join(corpus_dir, "octahedron.complex.json"),
        "--sheaf", os.path.join(corpus_dir, "octahedron.constant.sheaf.json"),
        "--region", json.dumps(["0", "1", "2", "3", "0,2", "1,2", "1,3", "0,3"])])
    assert code == 0
    assert json.loads(out)["local_cohomology"] == {"1": 1, "2": 1}


def test_cli_ext(corpus_dir):
    code, out = run_cli([
        "ext",
        "--complex", os.path.join(corpus_dir, "interval.complex.json"),
        "--sheaf-a", os.path.join(corpus_dir, "interval.open_extension.sheaf.json"),
        "--sheaf-b", os.path.join(corpus_dir, "interval.constant.sheaf.json")])
    assert code == 0
    assert json.loads(out)["ext"] == {"0": 1}


def test_cli_verify_interval():
    code, out = run_cli(["verify", "interval", "--seed", "3", "--covectors", "4"])
    assert code == 0
    rep = json.loads(out)
    assert rep["ok"] and rep["seed"] == 3


def test_cli_determinism(corpus_dir):
    args = ["cohomology",
            "--complex", os.path.join(corpus_dir, "circle.complex.json"),
            "--sheaf", os.path.join(corpus_dir, "circle.local_system.sheaf.json")]
    _, out1 = run_cli(args)
    _, out2 = run_cli(args)
    assert out1 == out2


def test_cli_entry_point_usage_error():
    proc = subprocess.run(
        [sys.executable, "-m", "cellsheaf.cli", "no-such-command"],
        capture_output=True)
    assert proc.returncode == 2
