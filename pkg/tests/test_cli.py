import json
import os
import subprocess
import sys

import numpy as np
import pytest

from poisson3d.cli import main

HALPHEN_WIDE_SPEC = {
    "name": "halphen-wide",
    "eta": "1 / (2*(x1 - x2)*(x2 - x3)*(x3 - x1))",
    "axes": [
        {"phi": "1", "psi": "u", "zeta": "u"},
        {"phi": "1", "psi": "u", "zeta": "u"},
        {"phi": "1", "psi": "u", "zeta": "u"},
    ],
    "kappa": [0.0, 0.0],
    "domain": {
        "box": [[0.0, 5.0], [0.0, 5.0], [0.0, 5.0]],
        "predicate": "(x1 - x2)*(x2 - x3)*(x3 - x1)",
    },
    "hamiltonian": "x1 + x2 + x3",
}

BROKEN_SPEC = {
    "name": "broken",
    "matrix": {"j12": "x1", "j23": "x2", "j31": "x3"},
    "domain": {"box": [[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]]},
}


@pytest.fixture()
def wide_spec_file(tmp_path):
    path = tmp_path / "halphen_wide.json"
    path.write_text(json.dumps(HALPHEN_WIDE_SPEC))
    return str(path)


@pytest.fixture()
def broken_spec_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(BROKEN_SPEC))
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_list(capsys):
    code, out, _ = run_cli(capsys, "list")
    assert code == 0
    assert out.splitlines() == ["halphen", "circle-maps", "euler-top"]


def test_verify_halphen_passes(capsys):
    code, out, _ = run_cli(capsys, "verify", "--system", "halphen", "--samples", "1000", "--seed", "42")
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"] == "pass"
    assert doc["max_abs_residual"] <= 1e-6
    assert doc["samples"] == 1000
    assert doc["seed"] == 42


def test_verify_broken_raw_field_fails(capsys, broken_spec_file):
    code, out, _ = run_cli(capsys, "verify", "--spec", broken_spec_file)
    assert code == 1
    doc = json.loads(out)
    assert doc["verdict"] == "fail"
    assert doc["max_abs_residual"] >= 1.0


def test_verify_rejects_bad_scheme_request(capsys, broken_spec_file):
    # raw expression entries do allow analytic; force fd and then ask a
    # family command for the raw file to hit the error path
    code, _, err = run_cli(capsys, "casimir", "--spec", broken_spec_file, "--k", "3", "--point", "1,1,1")
    assert code == 2
    assert "family spec" in err


def test_casimir_halphen_point(capsys):
    code, out, _ = run_cli(capsys, "casimir", "--system", "halphen", "--k", "3", "--point", "1,2,4")
    assert code == 0
    doc = json.loads(out)
    assert doc["value"] == 2.0
    np.testing.assert_allclose(doc["gradient"], [2.0, -3.0, 1.0], rtol=1e-12)
    assert abs(doc["annihilation_residual"]) <= 1e-12


def test_casimir_undefined_point_is_exit_2(capsys):
    code, _, err = run_cli(capsys, "casimir", "--system", "halphen", "--k", "3", "--point", "0.5,0.5,0.9")
    assert code == 2
    assert "undefined" in err


def test_darboux_report_with_point(capsys):
    code, out, _ = run_cli(
        capsys, "darboux", "--system", "halphen", "--k", "3",
        "--check-samples", "500", "--point", "0.1,0.5,0.9", "--seed", "42",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["k"] == 3
    assert doc["canonical_check"]["verdict"] == "pass"
    point = doc["point"]
    np.testing.assert_allclose(point["x_of_y"], point["x"], atol=1e-12)
    y1, y2, y3 = point["y"]
    assert point["factor"] == pytest.approx(1.0 / (2.0 * (y1 - y2) ** 2 * y3 * (1.0 - y3)), rel=1e-10)


def test_darboux_hypothesis_violation_is_exit_2(capsys, tmp_path):
    doc = dict(HALPHEN_WIDE_SPEC)
    doc = json.loads(json.dumps(HALPHEN_WIDE_SPEC))
    del doc["domain"]["predicate"]
    doc["eta"] = "1"
    path = tmp_path / "no_predicate.json"
    path.write_text(json.dumps(doc))
    code, _, err = run_cli(capsys, "darboux", "--spec", str(path), "--k", "3")
    assert code == 2
    assert "hypothesis" in err or "sign" in err


def test_simulate_writes_csv(capsys, tmp_path, wide_spec_file):
    out_csv = tmp_path / "traj.csv"
    code, out, _ = run_cli(
        capsys, "simulate", "--spec", wide_spec_file, "--x0", "1,2,4",
        "--t-end", "1.0", "--dt", "0.001", "--k", "3", "--out", str(out_csv),
    )
    assert code == 0
    summary = json.loads(out)
    assert summary["rows"] == 1001
    assert summary["max_abs_dH"] <= 1e-10
    assert summary["max_abs_dC"] <= 1e-8
    lines = out_csv.read_text().splitlines()
    assert lines[0] == "t,tau,x1,x2,x3,H,C"
    assert len(lines) == 1002
    first = lines[1].split(",")
    assert first[1] == ""  # no tau column values for a direct run
    assert float(first[2]) == 1.0 and float(first[6]) == 2.0
    ts = [float(line.split(",")[0]) for line in lines[1:]]
    assert ts == sorted(ts)


def test_simulate_reduced_csv(capsys, tmp_path, wide_spec_file):
    out_csv = tmp_path / "reduced.csv"
    code, out, _ = run_cli(
        capsys, "simulate", "--spec", wide_spec_file, "--x0", "1,2,4",
        "--t-end=-0.04", "--dt", "0.0001", "--reduced", "--k", "3", "--out", str(out_csv),
    )
    assert code == 0
    summary = json.loads(out)
    assert summary["reduced"] is True
    lines = out_csv.read_text().splitlines()
    rows = [line.split(",") for line in lines[1:]]
    ts = [float(r[0]) for r in rows]
    assert ts == sorted(ts)  # rows are in time order even though tau ran negative
    assert all(r[1] != "" for r in rows)
    cs = {r[6] for r in rows}
    assert len(cs) == 1  # the Casimir column is exactly constant


def test_simulate_domain_exit_is_exit_2(capsys, tmp_path):
    out_csv = tmp_path / "exit.csv"
    code, _, err = run_cli(
        capsys, "simulate", "--system", "halphen", "--x0", "0.1,0.5,0.9",
        "--t-end", "1.0", "--dt", "0.001", "--out", str(out_csv),
    )
    assert code == 2
    assert "left the domain" in err


def test_simulate_short_run_on_builtin(capsys, tmp_path):
    out_csv = tmp_path / "short.csv"
    code, out, _ = run_cli(
        capsys, "simulate", "--system", "halphen", "--x0", "0.1,0.5,0.9",
        "--t-end", "0.02", "--dt", "0.001", "--out", str(out_csv),
    )
    assert code == 0
    assert json.loads(out)["rows"] == 21


def test_bad_inputs_exit_2(capsys, tmp_path):
    code, _, err = run_cli(capsys, "verify", "--spec", str(tmp_path / "missing.json"))
    assert code == 2
    code, _, err = run_cli(capsys, "casimir", "--system", "halphen", "--k", "3", "--point", "1,2")
    assert code == 2
    code, _, err = run_cli(
        capsys, "simulate", "--system", "halphen", "--x0", "0.1,0.5,0.9",
        "--t-end", "1.0", "--dt", "-0.1", "--out", str(tmp_path / "x.csv"),
    )
    assert code == 2


def test_verify_fd_scheme_flag(capsys, tmp_path):
    spec_doc = json.loads(json.dumps(HALPHEN_WIDE_SPEC))
    spec_doc["domain"]["box"] = [[0.05, 0.45], [0.55, 0.95], [1.05, 1.45]]
    path = tmp_path / "ordered.json"
    path.write_text(json.dumps(spec_doc))
    code, out, _ = run_cli(capsys, "verify", "--spec", str(path), "--scheme", "fd", "--seed", "42")
    assert code == 0
    doc = json.loads(out)
    assert doc["derivative_scheme"] == "fd"
    assert doc["verdict"] == "pass"


def test_casimir_from_family_spec_file(capsys, wide_spec_file):
    code, out, _ = run_cli(capsys, "casimir", "--spec", wide_spec_file, "--k", "3", "--point", "1,2,4")
    assert code == 0
    assert json.loads(out)["value"] == 2.0


def test_darboux_auto_k(capsys):
    code, out, _ = run_cli(capsys, "darboux", "--system", "euler-top", "--check-samples", "200")
    assert code == 0
    doc = json.loads(out)
    assert doc["k"] in (1, 3)  # chi31 changes sign on the octant box, so k=2 is out
    assert doc["canonical_check"]["verdict"] == "pass"


def test_simulate_hamiltonian_flag_and_midpoint(capsys, tmp_path, wide_spec_file):
    out_csv = tmp_path / "quad.csv"
    code, out, _ = run_cli(
        capsys, "simulate", "--spec", wide_spec_file, "--x0", "1,2,4",
        "--t-end", "0.5", "--dt", "0.001", "--method", "midpoint",
        "--hamiltonian", "(x1^2 + x2^2 + x3^2)/2", "--k", "3", "--out", str(out_csv),
    )
    assert code == 0
    summary = json.loads(out)
    assert summary["method"] == "midpoint"
    header, first = out_csv.read_text().splitlines()[:2]
    assert float(first.split(",")[5]) == pytest.approx(0.5 * (1 + 4 + 16))


def test_simulate_without_hamiltonian_is_exit_2(capsys, tmp_path):
    doc = json.loads(json.dumps(HALPHEN_WIDE_SPEC))
    del doc["hamiltonian"]
    path = tmp_path / "no_h.json"
    path.write_text(json.dumps(doc))
    code, _, err = run_cli(
        capsys, "simulate", "--spec", str(path), "--x0", "1,2,4",
        "--t-end", "0.1", "--dt", "0.001", "--out", str(tmp_path / "x.csv"),
    )
    assert code == 2
    assert "Hamiltonian" in err


def test_euler_top_inertia_flag(capsys):
    code, out, _ = run_cli(capsys, "casimir", "--system", "euler-top", "--I", "1,2,3", "--k", "3", "--point", "1,1,1")
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(-7.0 / 15.0, rel=1e-13)
    code, _, err = run_cli(capsys, "casimir", "--system", "euler-top", "--I", "1,1,3", "--k", "3", "--point", "1,1,1")
    assert code == 2


def _run_subprocess(argv, env_extra=None):
    env = dict(os.environ)
    env.pop("POISSON3D_SEED", None)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "poisson3d", *argv],
        capture_output=True, cwd="/root/pkg", env=env,
    )


def test_spec_file_axis_without_zeta(capsys, tmp_path):
    doc = json.loads(json.dumps(HALPHEN_WIDE_SPEC))
    for axis in doc["axes"]:
        del axis["zeta"]
    path = tmp_path / "no_zeta.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run_cli(capsys, "casimir", "--spec", str(path), "--k", "3", "--point", "1,2,4")
    assert code == 0
    assert json.loads(out)["value"] == 2.0


def test_seed_env_override():
    base = _run_subprocess(["verify", "--system", "halphen", "--samples", "50"])
    assert base.returncode == 0
    assert json.loads(base.stdout)["seed"] == 42
    enved = _run_subprocess(["verify", "--system", "halphen", "--samples", "50"], {"POISSON3D_SEED": "7"})
    assert json.loads(enved.stdout)["seed"] == 7
    explicit = _run_subprocess(
        ["verify", "--system", "halphen", "--samples", "50", "--seed", "9"], {"POISSON3D_SEED": "7"}
    )
    assert json.loads(explicit.stdout)["seed"] == 9


def test_byte_identical_reruns(tmp_path, wide_spec_file):
    argv = ["verify", "--system", "halphen", "--samples", "300", "--seed", "42"]
    a = _run_subprocess(argv)
    b = _run_subprocess(argv)
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout

    csv_a, csv_b = tmp_path / "a.csv", tmp_path / "b.csv"
    sim = ["simulate", "--spec", wide_spec_file, "--x0", "1,2,4", "--t-end", "0.2",
           "--dt", "0.001", "--k", "3"]
    ra = _run_subprocess(sim + ["--out", str(csv_a)])
    rb = _run_subprocess(sim + ["--out", str(csv_b)])
    assert ra.returncode == rb.returncode == 0
    assert csv_a.read_bytes() == csv_b.read_bytes()
    assert ra.stdout.replace(str(csv_a).encode(), b"X") == rb.stdout.replace(str(csv_b).encode(), b"X")
