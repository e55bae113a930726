import math

import numpy as np
import pytest

from superfem.cli import EXIT_CERT, EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, em_checks, main
from superfem.config import load_config
from superfem.geometry import Parallelogram
from superfem.report import CSV_HEADER
from superfem.tensor import SPDTensor2, certify_mesh

UNIT = """
[domain]
vertices = 0, 0; 1, 0; 1, 1; 0, 1
[tensor]
a11 = {a11}
a12 = {a12}
a22 = {a22}
[study]
solution = {solution}
n_list = {n_list}
certification = {cert}
[output]
path = out.csv
"""


def write_cfg(tmp_path, a=(2, 1, 2), solution="sin_sin", n_list="2, 4", cert="strict"):
    path = tmp_path / "study.cfg"
    path.write_text(
        UNIT.format(a11=a[0], a12=a[1], a22=a[2], solution=solution, n_list=n_list, cert=cert), encoding="utf-8"
    )
    return str(path)


def read_csv(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    return lines[0], [line.split(",") for line in lines[1:]]


def test_gen_domain(capsys):
    assert main(["gen-domain", "--a11", "2", "--a12", "1", "--a22", "2", "--alpha", "2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "certified = True" in out
    verts = out.split("vertices = ")[1].splitlines()[0]
    p = Parallelogram.from_vertices([tuple(map(float, v.split(","))) for v in verts.split(";")])
    cert = certify_mesh(SPDTensor2(2, 1, 2), p.mesh(1))
    assert cert.certified and cert.alpha == pytest.approx(2.0, rel=1e-12)


def test_gen_domain_matches_second_test_domain(capsys):
    assert main(["gen-domain", "--a11", "2", "--a12", "2", "--a22", "8", "--alpha", "2"]) == EXIT_OK
    verts = capsys.readouterr().out.split("vertices = ")[1].splitlines()[0]
    ours = np.array([tuple(map(float, v.split(","))) for v in verts.split(";")])
    published = np.array([(0, 0), (1.1462, 0.9042), (0.6941, 2.2924), (-0.4521, 1.3882)])
    # both cells solve S Ahat S^T = A, so S_pub^-1 S_ours must preserve Ahat (gauge change)
    S_ours = np.column_stack([ours[1] - ours[0], ours[2] - ours[1]])
    S_pub = np.column_stack([published[1] - published[0], published[2] - published[1]])
    G = np.linalg.solve(S_pub, S_ours)
    ahat = np.array([[1, 0.5], [0.5, 1]])
    np.testing.assert_allclose(G @ ahat @ G.T, ahat, atol=5e-4)
    assert abs(np.linalg.det(S_ours)) == pytest.approx(abs(np.linalg.det(S_pub)), rel=1e-3)


def test_gen_domain_scalar_tensor(capsys):
    assert main(["gen-domain", "--a11", "3", "--a12", "0", "--a22", "3", "--alpha", "1"]) == EXIT_OK


def test_gen_domain_rejects_non_spd(capsys):
    assert main(["gen-domain", "--a11", "1", "--a12", "2", "--a22", "1", "--alpha", "1"]) == EXIT_CONFIG
    assert main(["gen-domain", "--a11", "1", "--a12", "0", "--a22", "1", "--alpha", "0"]) == EXIT_CONFIG


def test_check_presets(capsys):
    assert main(["check", "-c", "table1"]) == EXIT_OK
    assert "certified" in capsys.readouterr().out
    for k in range(2, 7):
        assert main(["check", "-c", f"table{k}"]) == EXIT_OK


def test_check_identity_fails_strict(tmp_path, capsys):
    assert main(["check", "-c", write_cfg(tmp_path, a=(1, 0, 1)), "-n", "2"]) == EXIT_CERT
    out = capsys.readouterr().out
    # reference energies (1, 2, 1) scaled by n^2 = 4
    assert "energies of worst triangle = 4, 8, 4" in out


def test_check_malformed_config(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("[domain]\nvertices = 0, 0; 1, 0; 1, 1; 0, 1\n[tensor]\na11 = 1\na12 = 0\n", encoding="utf-8")
    assert main(["check", "-c", str(path)]) == EXIT_CONFIG
    assert "missing [tensor] a22" in capsys.readouterr().err
    assert main(["check", "-c", str(tmp_path / "absent.cfg")]) == EXIT_CONFIG


def test_convergence_csv(tmp_path, capsys):
    assert main(["convergence", "-c", write_cfg(tmp_path, n_list="2, 4, 8"), "--output-dir", str(tmp_path)]) == EXIT_OK
    header, rows = read_csv(tmp_path / "out.csv")
    assert header == CSV_HEADER
    assert [r[0] for r in rows] == ["2", "4", "8"]
    assert rows[0][3] == rows[0][5] == rows[0][7] == ""
    assert all(r[3] for r in rows[1:])
    assert "| 1/h |" in capsys.readouterr().out


def test_convergence_single_level(tmp_path):
    assert main(["convergence", "-c", write_cfg(tmp_path, n_list="2"), "--output-dir", str(tmp_path)]) == EXIT_OK
    _, rows = read_csv(tmp_path / "out.csv")
    assert len(rows) == 1 and rows[0][3] == ""


def test_convergence_markdown(tmp_path):
    path = write_cfg(tmp_path, n_list="2, 4")
    with open(path, "a", encoding="utf-8") as fh:
        fh.write("format = markdown\n")
    assert main(["convergence", "-c", path, "--output-dir", str(tmp_path)]) == EXIT_OK
    text = (tmp_path / "out.csv").read_text(encoding="utf-8")
    assert text.startswith("| 1/h |") and text.count("\n") == 4


def test_convergence_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("SUPERFEM_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["convergence", "-c", write_cfg(tmp_path, n_list="2")]) == EXIT_OK
    assert (tmp_path / "env" / "out.csv").is_file()


def test_convergence_certification_failure_and_force(tmp_path):
    cfg = write_cfg(tmp_path, a=(1, 0, 1), n_list="2, 4")
    assert main(["convergence", "-c", cfg, "--output-dir", str(tmp_path)]) == EXIT_CERT
    assert not (tmp_path / "out.csv").exists()
    assert main(["convergence", "-c", cfg, "--output-dir", str(tmp_path), "--force"]) == EXIT_OK


def test_solver_failure_exit_code(tmp_path, monkeypatch):
    import superfem.fem as fem

    def broken(K, b, rtol=1e-13, maxiter=None):
        raise fem.SolverError("CG did not converge in 0 iterations", 1.0, 0)

    monkeypatch.setattr(fem, "conjugate_gradient", broken)
    assert main(["convergence", "-c", write_cfg(tmp_path), "--output-dir", str(tmp_path)]) == EXIT_SOLVER


def test_convergence_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["convergence", "-c", "table3", "--output-dir", str(d)]) == EXIT_OK
    assert (a / "table3.csv").read_bytes() == (b / "table3.csv").read_bytes()
    assert b"\r" not in (a / "table3.csv").read_bytes()


def test_solve_table1_n4(tmp_path, capsys):
    assert main(["solve", "-c", "table1", "-n", "4", "--output-dir", str(tmp_path)]) == EXIT_OK
    header, rows = read_csv(tmp_path / "table1_solve_n4.csv")
    assert header == "i,j,x,y,u_h,u_I,diff"
    assert len(rows) == 25
    linf = max(abs(float(r[6])) for r in rows)
    assert 2.7046e-6 / 2 <= linf <= 2 * 2.7046e-6


def test_solve_linear_and_single_cell(tmp_path, capsys):
    cfg = write_cfg(tmp_path, solution="linear")
    assert main(["solve", "-c", cfg, "-n", "7", "-o", "-"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 1 + 64
    assert max(abs(float(line.split(",")[6])) for line in lines[1:]) <= 1e-12
    assert main(["solve", "-c", write_cfg(tmp_path), "-n", "1", "-o", "-"]) == EXIT_OK
    rows = [line.split(",") for line in capsys.readouterr().out.splitlines()[1:]]
    assert all(float(r[6]) == 0.0 for r in rows)


def test_solve_rejects_bad_level(tmp_path):
    assert main(["solve", "-c", write_cfg(tmp_path), "-n", "0", "-o", "-"]) == EXIT_CONFIG


def test_solve_not_certified(tmp_path):
    cfg = write_cfg(tmp_path, a=(1, 0, 1))
    assert main(["solve", "-c", cfg, "-n", "2", "-o", "-"]) == EXIT_CERT
    assert main(["solve", "-c", cfg, "-n", "2", "-o", "-", "--force"]) == EXIT_OK


def test_em_verify(capsys):
    assert main(["em-verify"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("[PASS]") == 6
    assert "trapezoid 2, correction -2.66666666666667, remainder 1.06666666666667, sum 0.4" in out


def test_em_checks_all_pass():
    results = list(em_checks(7))
    assert all(ok for _, ok, _ in results)


def test_table1_n8_row(tmp_path):
    assert main(["convergence", "-c", "table1", "--output-dir", str(tmp_path)]) == EXIT_OK
    _, rows = read_csv(tmp_path / "table1.csv")
    row = next(r for r in rows if r[0] == "8")
    assert 7.2445e-7 / 2 <= float(row[4]) <= 2 * 7.2445e-7
    assert abs(float(row[5]) - 3.9069) <= 0.15


def test_table6_last_row(tmp_path):
    assert load_config("table6").manufactured.name == "cos_cos"
    assert main(["convergence", "-c", "table6", "--output-dir", str(tmp_path)]) == EXIT_OK
    _, rows = read_csv(tmp_path / "table6.csv")
    assert rows[-1][0] == "64"
    for col in (3, 5, 7):
        assert math.isclose(float(rows[-1][col]), 4.0, abs_tol=0.1)
