import json
import subprocess
import sys

import numpy as np
import pytest

from conjgrad import mmio
from conjgrad.cli import CSV_HEADER, main
from conjgrad.linalg import DenseMatrix, matvec


@pytest.fixture
def files(tmp_path):
    def make(a, b, name="sys", symmetry="symmetric"):
        m, v = tmp_path / f"{name}.mtx", tmp_path / f"{name}.rhs"
        mmio.write_matrix_market(DenseMatrix(a), m, symmetry=symmetry)
        mmio.write_vector(b, v)
        return str(m), str(v)
    return make


def test_solve_identity(files, capsys):
    m, b = files(np.eye(2), [1.0, 1.0])
    assert main(["solve", "--matrix", m, "--rhs", b]) == 0
    assert capsys.readouterr().out.startswith("converged in 1 iterations, ||r||/||b|| = ")


def test_solve_2x2_writes_report(files, tmp_path, capsys):
    m, b = files([[4, 1], [1, 3]], [1.0, 2.0])
    rep, xo = tmp_path / "r.json", tmp_path / "x.txt"
    code = main(["solve", "--matrix", m, "--rhs", b, "--tol", "1e-12", "--report", str(rep),
                 "--x-out", str(xo)])
    assert code == 0
    assert "converged in 2 iterations" in capsys.readouterr().out
    doc = json.loads(rep.read_text())
    assert doc["iterations"] == 2 and "invariants" not in doc
    assert np.allclose(mmio.read_vector(xo), [1 / 11, 7 / 11], rtol=0, atol=1e-12)


def test_solve_breakdown_exit_4(files):
    m, b = files(-np.eye(2), [1.0, 0.0])
    assert main(["solve", "--matrix", m, "--rhs", b]) == 4


def test_solve_max_iter_exit_3(files):
    from conjgrad.linalg import generate_laplacian_1d
    m, b = files(generate_laplacian_1d(30).to_dense(), np.ones(30))
    assert main(["solve", "--matrix", m, "--rhs", b, "--max-iter", "3"]) == 3


def test_solve_missing_file_exit_1(tmp_path, capsys):
    code = main(["solve", "--matrix", str(tmp_path / "no.mtx"), "--rhs", str(tmp_path / "b")])
    assert code == 1
    assert "cannot read" in capsys.readouterr().err


def test_solve_dimension_mismatch_exit_1(files, tmp_path):
    m, _ = files(np.eye(2), [1.0, 1.0])
    mmio.write_vector([1.0, 2.0, 3.0], tmp_path / "b3")
    assert main(["solve", "--matrix", m, "--rhs", str(tmp_path / "b3")]) == 1


@pytest.mark.parametrize("argv", [
    ["solve", "--matrix", "a.mtx"],
    ["solve", "--matrix", "a.mtx", "--rhs", "b", "--bogus"],
    ["solve", "--matrix", "a.mtx", "--rhs", "b", "--tol", "0"],
    ["generate", "triangle", "--n", "3", "--out", "x"],
    ["generate", "laplacian1d", "--n", "1", "--out", "x"],
    ["generate", "random-spd", "--n", "3", "--cond", "0.5", "--out", "x"],
    ["bench", "--family", "laplacian1d", "--sizes", "a,b"],
    [],
])
def test_usage_errors_exit_2(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2
    assert list(tmp_path.iterdir()) == []


def test_generate_laplacian(tmp_path):
    out = tmp_path / "l.mtx"
    assert main(["generate", "laplacian1d", "--n", "2", "--out", str(out)]) == 0
    assert np.array_equal(mmio.read_matrix_market(out).to_dense(), [[2, -1], [-1, 2]])


def test_generate_random_spd_is_byte_stable(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.mtx"
        main(["generate", "random-spd", "--n", "8", "--seed", "42", "--out", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_generate_rhs_consistent(tmp_path):
    a, b, x = tmp_path / "a.mtx", tmp_path / "b.txt", tmp_path / "x.txt"
    assert main(["generate", "random-spd", "--n", "16", "--seed", "3", "--cond", "1e3",
                 "--out", str(a), "--rhs-out", str(b), "--xtrue-out", str(x)]) == 0
    A, rhs, xt = mmio.read_matrix_market(a), mmio.read_vector(b), mmio.read_vector(x)
    assert np.linalg.norm(matvec(A, xt) - rhs) <= 1e-12 * np.linalg.norm(rhs)


def test_diagnose_2x2(files, tmp_path, capsys):
    m, b = files([[4, 1], [1, 3]], [1.0, 2.0])
    rep = tmp_path / "d.json"
    assert main(["diagnose", "--matrix", m, "--rhs", b, "--tol", "1e-12",
                 "--report", str(rep)]) == 0
    out = capsys.readouterr().out.splitlines()
    rows = [ln for ln in out[1:] if ln.split() and ln.split()[-1] in ("pass", "fail", "skipped")]
    assert len(rows) == 6 and all(r.endswith("pass") for r in rows)
    assert len(json.loads(rep.read_text())["invariants"]) == 6


def test_diagnose_exact_x0(files, tmp_path, capsys):
    m, b = files([[4, 1], [1, 3]], [1.0, 2.0])
    x0 = tmp_path / "x0"
    mmio.write_vector([1 / 11, 7 / 11], x0)
    assert main(["diagnose", "--matrix", m, "--rhs", b, "--x0", str(x0)]) == 0
    assert "in 0 iterations" in capsys.readouterr().out


def test_diagnose_asymmetric_fails(files, capsys):
    m, b = files([[4, 1 + 1e-3], [1, 3]], [1.0, 2.0], symmetry="general")
    code = main(["diagnose", "--matrix", m, "--rhs", b])
    assert code != 0
    captured = capsys.readouterr()
    assert "scalar_symmetry" in captured.err
    row = next(ln for ln in captured.out.splitlines() if ln.startswith("scalar_symmetry"))
    assert row.endswith("fail")


def test_bench_identity(capsys):
    assert main(["bench", "--family", "identity", "--sizes", "4,9"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == CSV_HEADER
    for ln in lines[1:]:
        assert ln.split(",")[3] == "1"


def test_bench_laplacian_ordering(tmp_path):
    csv = tmp_path / "b.csv"
    assert main(["bench", "--family", "laplacian1d", "--sizes", "32", "--tol", "1e-8",
                 "--csv", str(csv)]) == 0
    rows = [ln.split(",") for ln in csv.read_text().splitlines()]
    assert all(len(r) == 6 for r in rows)
    its = {r[2]: int(r[3]) for r in rows[1:]}
    assert its["cg"] <= 32 < its["sd"]


def test_bench_no_timing_is_byte_stable(tmp_path):
    texts = []
    for k in range(2):
        csv = tmp_path / f"b{k}.csv"
        main(["bench", "--family", "random-spd", "--sizes", "4,8", "--seed", "7",
              "--no-timing", "--csv", str(csv)])
        texts.append(csv.read_bytes())
    assert texts[0] == texts[1]


def test_report_json_byte_stable(files, tmp_path):
    m, b = files([[4, 1], [1, 3]], [1.0, 2.0])
    reports = []
    for k in range(2):
        rep = tmp_path / f"r{k}.json"
        main(["diagnose", "--matrix", m, "--rhs", b, "--report", str(rep)])
        reports.append(rep.read_bytes())
    assert reports[0] == reports[1]


def test_module_entry_point(files):
    m, b = files(np.eye(2), [1.0, 1.0])
    proc = subprocess.run([sys.executable, "-m", "conjgrad", "solve", "--matrix", m, "--rhs", b],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("converged in 1 iterations")
