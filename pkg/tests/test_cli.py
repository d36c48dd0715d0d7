"""End-to-end command-line behavior."""

import json
import math
import subprocess
import sys

import pytest

from l2twist import serialize
from l2twist.grouprings import Character, GroupDescriptor, GroupRingElement, GroupRingMatrix
from l2twist.torsion import BasedChainComplex, circle_complex

Z = GroupDescriptor.abelian(1)


def run_cli(*argv):
    return subprocess.run(
        [sys.executable, "-m", "l2twist.cli", *argv],
        capture_output=True,
        text=True,
    )


def circle_job(path):
    obj = {
        "complex": serialize.complex_to_json(circle_complex()),
        "character": {"target": "R", "values": [1.0]},
    }
    path.write_text(json.dumps(obj))
    return path


def test_torsion_curve_csv(tmp_path):
    inp = circle_job(tmp_path / "circle.json")
    csv_path = tmp_path / "curve.csv"
    proc = run_cli("torsion", "--input", str(inp), "--csv", str(csv_path),
                   "--tmin", "0.25", "--tmax", "4.0", "--points", "9")
    assert proc.returncode == 0, proc.stderr
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "t,rho,status,envelope_lower,envelope_upper"
    assert len(lines) == 10
    for line in lines[1:]:
        t, rho, status = line.split(",")[:3]
        assert status == "ok"
        assert float(rho) == pytest.approx(math.log(max(float(t), 1.0)), abs=1e-9)


def test_torsion_output_is_deterministic(tmp_path):
    inp = circle_job(tmp_path / "circle.json")
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / f"{tag}.json"
        csv_path = tmp_path / f"{tag}.csv"
        proc = run_cli("torsion", "--input", str(inp), "--output", str(out),
                       "--csv", str(csv_path))
        assert proc.returncode == 0, proc.stderr
        outs.append((out.read_bytes(), csv_path.read_bytes()))
    assert outs[0] == outs[1]


def test_torsion_plot_renders_png(tmp_path):
    inp = circle_job(tmp_path / "circle.json")
    png = tmp_path / "curve.png"
    proc = run_cli("torsion", "--input", str(inp), "--plot", str(png))
    assert proc.returncode == 0, proc.stderr
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_mahler_quadrature_command():
    proc = run_cli("mahler", "--poly", "1+x+y", "--method", "quadrature",
                   "--quadrature-n", "512")
    assert proc.returncode == 0, proc.stderr
    result = json.loads(proc.stdout)
    assert result["value"] == pytest.approx(0.323065, abs=2e-3)
    assert result["nvars"] == 2


def test_mahler_exact_command():
    proc = run_cli("mahler", "--poly", "2x-1", "--method", "exact")
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["value"] == pytest.approx(math.log(2.0), abs=1e-12)


def test_fkdet_command(tmp_path):
    A = GroupRingMatrix(Z, [[GroupRingElement.monomial(Z, (1,), 2)
                             + GroupRingElement.monomial(Z, (0,), -1)]])
    job = tmp_path / "job.json"
    job.write_text(json.dumps({
        "group": serialize.group_to_json(Z),
        "matrix": serialize.matrix_to_json(A),
    }))
    proc = run_cli("fkdet", "--input", str(job))
    assert proc.returncode == 0, proc.stderr
    result = json.loads(proc.stdout)
    assert result["det_class"] is True
    assert result["logdet"] == pytest.approx(math.log(2.0), abs=1e-9)


def test_verify_scaling_passes(tmp_path):
    inp = circle_job(tmp_path / "circle.json")
    proc = run_cli("verify", "--check", "scaling", "--r", "2.0", "--input", str(inp))
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["ok"] is True


def test_verify_duality_mismatch_exits_three(tmp_path):
    wrong = BasedChainComplex(
        Z, (1, 1),
        (GroupRingMatrix(Z, [[GroupRingElement.monomial(Z, (1,), 2)
                              + GroupRingElement.monomial(Z, (0,), -1)]]),),
    )
    obj = {
        "complex": serialize.complex_to_json(circle_complex()),
        "character": {"target": "R", "values": [1.0]},
        "dual": serialize.complex_to_json(wrong),
    }
    inp = tmp_path / "dual.json"
    inp.write_text(json.dumps(obj))
    proc = run_cli("verify", "--check", "duality", "--input", str(inp))
    assert proc.returncode == 3
    assert json.loads(proc.stdout)["ok"] is False


def test_strict_torsion_exits_four_on_non_det_class(tmp_path):
    C = BasedChainComplex(Z, (1, 1), (GroupRingMatrix.zero(Z, 1, 1),))
    obj = {"complex": serialize.complex_to_json(C),
           "character": {"target": "R", "values": [1.0]}}
    inp = tmp_path / "bad.json"
    inp.write_text(json.dumps(obj))
    proc = run_cli("torsion", "--input", str(inp), "--strict")
    assert proc.returncode == 4


def test_invalid_json_exits_two(tmp_path):
    inp = tmp_path / "broken.json"
    inp.write_text("{not json")
    proc = run_cli("torsion", "--input", str(inp))
    assert proc.returncode == 2


def test_schema_violation_exits_two(tmp_path):
    inp = tmp_path / "schema.json"
    inp.write_text(json.dumps({"complex": {"group": {"kind": "banana"}}}))
    proc = run_cli("torsion", "--input", str(inp))
    assert proc.returncode == 2


def test_missing_input_exits_two(tmp_path):
    proc = run_cli("torsion", "--input", str(tmp_path / "absent.json"))
    assert proc.returncode == 2


def test_bad_poly_string_exits_two():
    proc = run_cli("mahler", "--poly", "xy")
    assert proc.returncode == 2


def test_degree_command(tmp_path):
    inp = circle_job(tmp_path / "circle.json")
    proc = run_cli("degree", "--input", str(inp),
                   "--tmin", "0.015625", "--tmax", "64.0", "--points", "25")
    assert proc.returncode == 0, proc.stderr
    result = json.loads(proc.stdout)
    assert result["degree"] == pytest.approx(1.0, abs=1e-6)
