"""CLI surface: formats, exit codes, schema validity, determinism."""

import json
import subprocess
import sys

import jsonschema
import pytest

from planeheights.cli import main
from planeheights.schemas import SCHEMAS

HENON2 = {"type": "henon", "a": "1", "p": "x^2"}
TRI = {"type": "triangular", "a": "1", "b": "1", "c": "0", "P": "y^2"}
COMP = {"type": "compose", "maps": [HENON2, {"type": "henon", "a": "-1", "p": "x^3 - 2*x + 1"}]}
CONJ = {"type": "conjugate", "inner": HENON2, "by": {"type": "triangular", "a": "1", "b": "1", "c": "0", "P": "1"}}


@pytest.fixture()
def maps(tmp_path):
    paths = {}
    for name, doc in (("henon2", HENON2), ("tri", TRI), ("comp", COMP), ("conj", CONJ)):
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(doc))
        paths[name] = str(path)
    return paths


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_height_text(capsys):
    code, out, _ = run_cli(capsys, ["height", "--point", "3/2,5"])
    assert code == 0
    assert "log 10" in out and "2.30258509299" in out


def test_height_points_file(capsys, tmp_path):
    pts = tmp_path / "pts.txt"
    pts.write_text("# sample points\n3 0\n1/2 -7\n")
    code, out, _ = run_cli(capsys, ["height", "--points", str(pts)])
    assert code == 0
    assert len(out.strip().splitlines()) == 2


def test_height_malformed_rational_exit_2(capsys):
    code, _, err = run_cli(capsys, ["height", "--point", "3//2,5"])
    assert code == 2
    assert "error" in err


def test_height_json_schema(capsys):
    code, out, _ = run_cli(capsys, ["height", "--point", "3,0", "--format", "json"])
    assert code == 0
    jsonschema.validate(json.loads(out), SCHEMAS["height"])


def test_dyndeg_henon(capsys, maps):
    code, out, _ = run_cli(capsys, ["dyndeg", "--map", maps["henon2"]])
    assert code == 0
    assert "delta=2" in out and "regular=true" in out


def test_dyndeg_triangular(capsys, maps):
    code, out, _ = run_cli(capsys, ["dyndeg", "--map", maps["tri"]])
    assert code == 0
    assert "delta=1" in out and "regular=false" in out


def test_dyndeg_composite(capsys, maps):
    code, out, _ = run_cli(capsys, ["dyndeg", "--map", maps["comp"], "--format", "json"])
    assert code == 0
    payload = json.loads(out)
    jsonschema.validate(payload, SCHEMAS["dyndeg"])
    assert payload["dynamical_degree"] == 6


def test_canheight_json_schema(capsys, maps):
    code, out, _ = run_cli(capsys, [
        "canheight", "--map", maps["henon2"], "--point", "3,0", "--format", "json",
    ])
    assert code == 0
    payload = json.loads(out)
    jsonschema.validate(payload, SCHEMAS["canheight"])
    assert payload["points"][0]["residual"] <= 1e-3


def test_canheight_refuses_triangularizable(capsys, maps):
    code, _, err = run_cli(capsys, ["canheight", "--map", maps["tri"], "--point", "3,0"])
    assert code == 2
    assert "triangulariz" in err


def test_canheight_conjugated_map(capsys, maps):
    code, out, _ = run_cli(capsys, [
        "canheight", "--map", maps["conj"], "--point", "3,0", "--format", "json",
    ])
    assert code == 0
    assert json.loads(out)["delta"] == 2


def test_orbit_json_schema(capsys, maps):
    code, out, _ = run_cli(capsys, [
        "orbit", "--map", maps["henon2"], "--point", "3,0",
        "--T-grid", "5:9:3", "--window", "3", "--format", "json",
    ])
    assert code == 0
    payload = json.loads(out)
    jsonschema.validate(payload, SCHEMAS["orbit"])
    assert all(row["pass"] for row in payload["counting"])


def test_orbit_csv_sections(capsys, maps):
    code, out, _ = run_cli(capsys, [
        "orbit", "--map", maps["henon2"], "--point", "3,0",
        "--T", "100", "--window", "2", "--format", "csv",
    ])
    assert code == 0
    scan, counting = out.split("\n\n")
    assert scan.splitlines()[0] == "l,x,y,h_nv,hhat"
    assert counting.splitlines()[0] == "T,count,predicted,lower,upper"


def test_orbit_periodic_point_rejected(capsys, maps):
    code, _, err = run_cli(capsys, ["orbit", "--map", maps["henon2"], "--point", "0,0"])
    assert code == 2
    assert "non-periodic" in err


def test_periodic_exit_codes(capsys, maps):
    code, out, _ = run_cli(capsys, ["periodic", "--map", maps["henon2"], "--point", "0,0"])
    assert code == 0 and "period 1" in out
    code, _, _ = run_cli(capsys, ["periodic", "--map", maps["henon2"], "--point", "3,0"])
    assert code == 1
    tri_shift = {"type": "triangular", "a": "1", "b": "1", "c": "1", "P": "0"}
    import json as j, tempfile, os
    fd, path = tempfile.mkstemp(suffix=".json")
    with os.fdopen(fd, "w") as handle:
        j.dump(tri_shift, handle)
    code, _, _ = run_cli(capsys, ["periodic", "--map", path, "--point", "0,0"])
    assert code == 3
    os.unlink(path)


def test_periodic_json_schema(capsys, maps):
    code, out, _ = run_cli(capsys, [
        "periodic", "--map", maps["henon2"], "--point", "0,0", "--format", "json",
    ])
    assert code == 0
    jsonschema.validate(json.loads(out), SCHEMAS["periodic"])


def test_picard_json_schema(capsys):
    code, out, _ = run_cli(capsys, ["picard", "--d", "3", "--format", "json"])
    assert code == 0
    payload = json.loads(out)
    jsonschema.validate(payload, SCHEMAS["picard"])
    assert all(payload["checks"].values())


def test_picard_csv(capsys):
    code, out, _ = run_cli(capsys, ["picard", "--d", "2", "--format", "csv"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "label,pi,phi,psi,D"
    assert len(lines) == 8  # header + 7 classes
    assert lines[1] == "H#,1,2,2,3/2"


def test_picard_rejects_d1(capsys):
    with pytest.raises(SystemExit):
        main(["picard", "--d", "1"])


def test_missing_map_file(capsys):
    code, _, err = run_cli(capsys, ["dyndeg", "--map", "/nonexistent.json"])
    assert code == 2


def test_run_config_invariants_enforced(maps):
    # depth >= 2, patience >= 1, digit cap >= 10^4 (argparse exits with 2)
    for argv in (
        ["canheight", "--map", maps["henon2"], "--point", "3,0", "--depth", "1"],
        ["periodic", "--map", maps["henon2"], "--point", "3,0", "--patience", "0"],
        ["canheight", "--map", maps["henon2"], "--point", "3,0", "--digit-cap", "100"],
    ):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_resource_cap_exit_code(capsys, maps):
    code, _, err = run_cli(capsys, [
        "canheight", "--map", maps["henon2"], "--point", "3,0",
        "--depth", "40", "--digit-cap", "10000",
    ])
    assert code == 4
    assert "resource cap" in err


def test_determinism_repeated_runs(capsys, maps):
    argv = ["orbit", "--map", maps["henon2"], "--point", "3,0",
            "--T-grid", "5:13:5", "--format", "json"]
    _, first, _ = run_cli(capsys, argv)
    _, second, _ = run_cli(capsys, argv)
    assert first == second


def test_parallel_matches_sequential(capsys, maps, tmp_path):
    pts = tmp_path / "pts.txt"
    pts.write_text("3 0\n1 1\n-2 5\n")
    base = ["canheight", "--map", maps["henon2"], "--points", str(pts), "--format", "json"]
    _, seq, _ = run_cli(capsys, base)
    _, par, _ = run_cli(capsys, base + ["--parallel"])
    assert seq == par


def test_parallel_orbit_matches_sequential(capsys, maps):
    base = ["orbit", "--map", maps["henon2"], "--point", "3,0",
            "--T-grid", "5:11:4", "--format", "csv"]
    _, seq, _ = run_cli(capsys, base)
    _, par, _ = run_cli(capsys, base + ["--parallel"])
    assert seq == par


def test_console_entry_point(maps):
    proc = subprocess.run(
        [sys.executable, "-m", "planeheights.cli", "height", "--point", "3,0"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "log 3" in proc.stdout
