import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from cli_cases import CASES, GOLDEN, ROOT, golden_path
from intreach.cli import RunConfig, build_parser, read_matrix, run
from intreach.errors import SpecError


@pytest.fixture(autouse=True)
def _pinned(monkeypatch):
    monkeypatch.chdir(ROOT)
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")


def _run(argv, capsys):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def _split_csv(text):
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    meta = json.loads(lines[0][2:])
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    return meta, rows[0], rows[1:]


def _same_cell(a, b, rtol):
    if a == b:
        return True
    try:
        x, y = float(a), float(b)
    except ValueError:
        return False
    return abs(x - y) <= rtol * max(1.0, abs(x), abs(y))


def _same_json(a, b, rtol):
    if isinstance(a, dict):
        return isinstance(b, dict) and a.keys() == b.keys() and all(_same_json(a[k], b[k], rtol) for k in a)
    if isinstance(a, list):
        return isinstance(b, list) and len(a) == len(b) and all(_same_json(x, y, rtol) for x, y in zip(a, b))
    if isinstance(a, float) or isinstance(b, float):
        return _same_cell(str(a), str(b), rtol)
    return a == b


def _drop_created(meta):
    return {k: v for k, v in meta.items() if k != "created"}


@pytest.mark.parametrize("name", sorted(CASES))
def test_matches_golden(name, capsys):
    argv = CASES[name]
    code, out, err = _run(argv, capsys)
    assert code == 0, err
    want = golden_path(name, argv).read_text()
    if name.endswith("json"):
        got, ref = json.loads(out), json.loads(want)
        assert _drop_created(got["meta"]) == _drop_created(ref["meta"])
        assert _same_json(got["data"], ref["data"], 1e-9)
        return
    gm, gh, gr = _split_csv(out)
    rm, rh, rr = _split_csv(want)
    assert _drop_created(gm) == _drop_created(rm)
    assert gh == rh and len(gr) == len(rr)
    for a, b in zip(gr, rr):
        assert len(a) == len(b)
        assert all(_same_cell(x, y, 1e-9) for x, y in zip(a, b)), (a, b)


def test_double_integrator_boundary_against_direct_integration(capsys):
    code, out, _ = _run(["boundary", "--spec", "recipes/double_integrator.json"], capsys)
    assert code == 0
    _, header, rows = _split_csv(out)
    with open(GOLDEN / "double_integrator_boundary.csv") as fh:
        ref = list(csv.reader(fh))
    assert header == ref[0]
    got = np.array(rows, dtype=float)
    want = np.array(ref[1:], dtype=float)
    assert got.shape == want.shape == (100, 5)
    np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["cloud", "--spec", "recipes/planar_l2_inputs.json", "--samples", "300", "--seed", "7"]
    assert run([*argv, "--out", str(a)]) == 0
    assert run([*argv, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_metadata_records_seed_and_spec(capsys):
    _, out, _ = _run(["cloud", "--spec", "recipes/planar_l2_inputs.json", "--samples", "3", "--seed", "9"], capsys)
    meta, header, rows = _split_csv(out)
    assert meta["tool"] == "intreach" and meta["seed"] == 9 and meta["subcommand"] == "cloud"
    assert meta["spec"]["input_set"]["p"] == 2
    assert meta["settings"]["samples"] == 3
    assert meta["created"] == "1970-01-01T00:00:00Z"
    assert header == ["x1", "x2"] and len(rows) == 3


def test_json_format(capsys):
    code, out, _ = _run(["support", "--spec", "recipes/double_integrator.json", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"meta", "data"}
    assert [r["y1"] for r in doc["data"]] == [1.0, 0.0, -1.0, -0.0]


def test_empty_direction_file_gives_header_only(capsys):
    code, out, _ = _run(["support", "--spec", "recipes/double_integrator.json", "--dirs", "tests/golden/inputs/empty.csv"], capsys)
    assert code == 0
    _, header, rows = _split_csv(out)
    assert header == ["y1", "y2", "h"] and rows == []


@pytest.mark.parametrize(
    "argv",
    [
        ["support"],
        ["support", "--spec", "does/not/exist.json"],
        ["support", "--spec", "recipes/double_integrator.json", "--dirs", "tests/golden/inputs/dirs3.csv"],
        ["boundary", "--spec", "recipes/double_integrator.json", "--grid", "0"],
        ["implicit"],
        ["implicit", "--r", "0"],
        ["membership", "--spec", "recipes/double_integrator.json"],
        ["simulate", "--spec", "recipes/double_integrator.json"],
        ["bench", "--spec", "recipes/double_integrator.json", "--method", "hull"],
        ["nonsense"],
        ["support", "--bogus"],
    ],
)
def test_invalid_input_exits_2(argv, capsys):
    code, out, err = _run(argv, capsys)
    assert code == 2 and out == ""
    msg = json.loads(err.strip())
    assert msg["exit"] == 2 and msg["message"]


def test_bad_spec_contents_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"blocks": [{"r": 2, "x0": [0], "alpha": -1, "beta": 1}], "t": 1}')
    code, _, err = _run(["support", "--spec", str(p)], capsys)
    assert code == 2 and json.loads(err)["error"] == "SpecError"


def test_numerical_failure_exits_3(tmp_path, capsys):
    p = tmp_path / "flat.json"
    p.write_text('{"blocks": [{"r": 2, "x0": [0, 0], "alpha": 1, "beta": 1}], "t": 1}')
    code, _, err = _run(["lines", "--spec", str(p), "--samples", "2"], capsys)
    assert code == 3 and json.loads(err)["exit"] == 3
    # a direction with a zero block component has a face, not a vertex
    d = tmp_path / "d.csv"
    d.write_text("1,0,0\n")
    code, _, err = _run(["support", "--spec", "recipes/two_input.json", "--dirs", str(d), "--supporting-points"], capsys)
    assert code == 3 and json.loads(err)["error"] == "FaceNotVertexError"


def test_figures_are_written(tmp_path, capsys):
    f1, f2 = tmp_path / "b.png", tmp_path / "c.png"
    assert run(["boundary", "--spec", "recipes/triple_integrator.json", "--grid", "8", "--figure", str(f1)]) == 0
    assert run(["cloud", "--spec", "recipes/spatial_linf_inputs.json", "--samples", "200", "--figure", str(f2)]) == 0
    capsys.readouterr()
    for f in (f1, f2):
        assert f.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_simulate_switch_schedule(tmp_path, capsys):
    s = tmp_path / "s.csv"
    s.write_text("0,1,-1\n1,2,1\n")
    code, out, _ = _run(["simulate", "--spec", "recipes/double_integrator_short.json", "--t", "2", "--schedule", str(s)], capsys)
    assert code == 0
    _, _, rows = _split_csv(out)
    np.testing.assert_allclose(np.array(rows, float), [[-1.0, 0.0]], atol=1e-15)


def test_gapped_schedule_rejected(tmp_path, capsys):
    s = tmp_path / "s.csv"
    s.write_text("0,1,-1\n1.5,2,1\n")
    code, _, _ = _run(["simulate", "--spec", "recipes/double_integrator_short.json", "--t", "2", "--schedule", str(s)], capsys)
    assert code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "intreach", "implicit", "--r", "2"], capture_output=True, text=True, cwd=ROOT)
    assert res.returncode == 0
    assert "rho2^2" in res.stdout


def test_run_config_rejects_unknown_fields():
    ns = build_parser().parse_args(["support"])
    ns.extra = 1
    with pytest.raises(SpecError):
        RunConfig.from_namespace(ns)


def test_read_matrix(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("# comment\n1,2\n\n3,4\n")
    np.testing.assert_array_equal(read_matrix(str(p), 2), [[1, 2], [3, 4]])
    with pytest.raises(SpecError):
        read_matrix(str(p), 3)
    p.write_text("1,2\n3\n")
    with pytest.raises(SpecError):
        read_matrix(str(p))
