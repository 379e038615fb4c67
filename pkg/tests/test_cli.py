import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from g2sym import cli
from g2sym.g2core import PHI0_TEXT
from g2sym.liealg import TABLE1

SCHEMA = json.loads((Path(__file__).parents[1] / "docs" / "report.schema.json").read_text())
ROW4 = "(0,0,e^{12},0,e^{13},e^{24}+e^{23},e^{25}+e^{34}+e^{15}+e^{16}-3e^{26})"


def run(capsys, *argv):
    code = cli.main(list(argv) + ["--json"])
    out = capsys.readouterr().out
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    return code, report


def run_text(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


def leaves(value, key=None):
    if isinstance(value, dict):
        for k, v in value.items():
            yield from leaves(v, k)
    elif isinstance(value, list) and any(isinstance(x, (dict, list)) for x in value):
        for item in value:
            yield from leaves(item, None)
    else:
        yield key, value


# ---------------------------------------------------------------- algebra

def test_algebra_betti_row4(capsys):
    code, rep = run(capsys, "algebra", "betti", ROW4)
    assert code == 0 and rep["status"] == "ok"
    alg = rep["outputs"]["algebras"][0]
    assert alg["b2"] == 6
    assert alg["betti"] == [1, 3, 6, 8, 8, 6, 3, 1]


def test_algebra_betti_abelian(capsys):
    code, rep = run(capsys, "algebra", "betti", "(0,0,0,0,0,0,0)")
    assert rep["outputs"]["algebras"][0]["betti"] == [1, 7, 21, 35, 35, 21, 7, 1]


def test_algebra_check_builtin(capsys):
    code, rep = run(capsys, "algebra", "check", "@row3")
    alg = rep["outputs"]["algebras"][0]
    assert code == 0 and alg["jacobi"] and alg["unimodular"]


def test_algebra_check_jacobi_failure(capsys):
    code, rep = run(capsys, "algebra", "check", "(0,0,e^{12},e^{13},e^{34})")
    assert code == 1
    assert rep["status"] == "error"
    assert "Jacobi" in rep["error"]


def test_algebra_parse_error(capsys):
    code, rep = run(capsys, "algebra", "betti", "(0, e^{11})")
    assert code == 1 and "repeated" in rep["error"]


def test_algebra_file(capsys, tmp_path):
    path = tmp_path / "algs.txt"
    path.write_text("".join(f"{k}: {v}\n" for k, v in TABLE1.items()), encoding="utf-8")
    code, rep = run(capsys, "algebra", "betti", str(path))
    assert [a["b2"] for a in rep["outputs"]["algebras"]] == [3, 3, 5, 6]


def test_unknown_builtin(capsys):
    code, rep = run(capsys, "algebra", "check", "@row9")
    assert code == 1 and "unknown" in rep["error"]


# ---------------------------------------------------------------- g2

def test_g2_metric_phi0(capsys):
    code, rep = run(capsys, "g2", "metric", "--algebra", "abelian7", "--phi", PHI0_TEXT)
    m = rep["outputs"]["metric"]
    assert code == 0
    assert all(abs(m["g"][i][j] - (i == j)) < 1e-12 for i in range(7) for j in range(7))
    assert m["vol_coeff"] == pytest.approx(1.0, abs=1e-12)


def test_g2_torsion_abelian_parallel(capsys):
    code, rep = run(capsys, "g2", "torsion", "--algebra", "@abelian7", "--phi", "@phi0")
    assert rep["outputs"]["torsion"]["parallel"] is True


def test_g2_needs_phi(capsys):
    code, rep = run(capsys, "g2", "metric", "--algebra", "@row1")
    assert code == 1 and "--phi" in rep["error"]


def test_g2_not_positive(capsys):
    code, rep = run(capsys, "g2", "metric", "--algebra", "@row1", "--phi", "e^{123} + e^{456}")
    assert code == 1 and rep["status"] == "error"


def test_g2_verify_row1(capsys, witnesses):
    code, rep = run(capsys, "g2", "verify", "--algebra", "@row1", "--seed", "0",
                    "--attempts", "10000")
    v = rep["outputs"]["verification"]
    assert code == 0
    assert all(v[k] for k in ("abelian", "bound_b2_ok", "bound_6_ok", "F_injective",
                              "harmonic_ok", "confirmed"))
    assert v["dim_s"] <= 3
    assert rep["outputs"]["phi"] == witnesses["row1"]


def test_g2_verify_given_phi_hypothesis_error(capsys):
    code, rep = run(capsys, "g2", "verify", "--algebra", "@abelian7", "--phi", "@phi0")
    assert code == 1 and "non-parallel" in rep["error"]


def test_g2_find_closed_not_found(capsys):
    code, rep = run(capsys, "g2", "find-closed", "--algebra", "@row1", "--attempts", "10")
    assert code == 2
    assert rep["status"] == "not_found"
    assert rep["outputs"]["z3_dim"] == 19


def test_g2_symmetry(capsys, witnesses):
    code, rep = run(capsys, "g2", "symmetry", "--algebra", "@row2", "--phi", witnesses["row2"])
    assert code == 0 and rep["outputs"]["symmetry"]["abelian"]


# ---------------------------------------------------------------- table1 / torus

def test_table1(capsys):
    code, rep = run(capsys, "table1")
    assert code == 0
    assert [r["b2"] for r in rep["outputs"]["rows"]] == [3, 3, 5, 6]
    assert all(r["status"] == "PASS" for r in rep["outputs"]["rows"])


def test_torus_counts(capsys):
    code, rep = run(capsys, "torus", "--amp-a", "1", "--amp-b", "1", "--amp-c", "1", "--grid", "3")
    assert code == 0 and rep["outputs"]["symmetry_count"] == 4
    code, rep = run(capsys, "torus", "--amp-a", "0", "--amp-b", "0", "--amp-c", "0", "--grid", "3")
    assert rep["outputs"]["symmetry_count"] == 7 and rep["outputs"]["parallel"]


def test_torus_negative_amplitude(capsys):
    code, rep = run(capsys, "torus", "--amp-a", "-1")
    assert code == 1


# ---------------------------------------------------------------- output contract

@pytest.mark.parametrize("argv", [
    ("g2", "metric", "--algebra", "abelian7", "--phi", "@phi0"),
    ("torus", "--grid", "2"),
    ("algebra", "betti", "@row2"),
])
def test_text_and_json_carry_same_numbers(capsys, argv):
    _, rep = run(capsys, *argv)
    _, text = run_text(capsys, *argv)
    lines = set(line.strip() for line in text.splitlines())
    for key, value in leaves(rep):
        if key is None:
            continue
        shown = value if isinstance(value, str) else json.dumps(value)
        assert f"{key}: {shown}" in lines, key


def test_deterministic(capsys):
    argv = ("g2", "find-closed", "--algebra", "@row3", "--seed", "3")
    assert run(capsys, *argv) == run(capsys, *argv)


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "g2sym", "algebra", "betti", "@row1", "--json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["outputs"]["algebras"][0]["b2"] == 3


def test_exit_code_not_found_subprocess():
    proc = subprocess.run([sys.executable, "-m", "g2sym", "g2", "verify", "--algebra", "@row1",
                           "--attempts", "5"], capture_output=True, text=True, check=False)
    assert proc.returncode == 2
    assert "g2sym:" in proc.stderr
