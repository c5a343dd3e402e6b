import csv
import json
import math
import re
import subprocess
import sys

import numpy as np
import pytest

from fermilength.cli import main
from fermilength.mitigation import CalibrationSet
from fermilength.pauli_model import QubitHamiltonian, build_hamiltonian, dense_matrix, exact_gs_energy
from fermilength.simulator import CountsTable


def run_qasm(text):
    """Tiny OpenQASM 2.0 interpreter for x / cx / ry on a dense statevector."""
    n = int(re.search(r"qreg q\[(\d+)\];", text).group(1))
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1
    idx = np.arange(2**n)

    def bit(q):
        return (idx >> (n - 1 - q)) & 1

    for line in text.splitlines():
        line = line.strip()
        if m := re.fullmatch(r"x q\[(\d+)\];", line):
            psi = psi[idx ^ (1 << (n - 1 - int(m.group(1))))]
        elif m := re.fullmatch(r"cx q\[(\d+)\],q\[(\d+)\];", line):
            c, t = int(m.group(1)), int(m.group(2))
            src = np.where(bit(c) == 1, idx ^ (1 << (n - 1 - t)), idx)
            psi = psi[src]
        elif m := re.fullmatch(r"ry\(([^)]+)\) q\[(\d+)\];", line):
            theta, q = float(m.group(1)), int(m.group(2))
            c, s = math.cos(theta / 2), math.sin(theta / 2)
            partner = psi[idx ^ (1 << (n - 1 - q))]
            psi = np.where(bit(q) == 0, c * psi - s * partner, s * partner + c * psi)
        elif line.startswith(("OPENQASM", "include", "qreg", "creg", "measure")) or not line:
            continue
        else:
            raise AssertionError(f"unexpected QASM line {line!r}")
    return psi


@pytest.fixture
def cli(capsys):
    def call(*argv):
        code = main([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err
    return call


class TestExactAndScore:
    def test_exact(self, cli):
        code, out, _ = cli("exact", "--length", 3)
        assert code == 0 and out.strip() == "-1.414213562373"

    def test_score_pass_and_fail(self, cli):
        code, out, _ = cli("score", "--energy", -1.0, "--length", 2)
        assert code == 0 and out.split()[1] == "PASS"
        assert float(out.split()[0]) < 1e-15
        code, out, _ = cli("score", "--energy", 0.0, "--length", 2, "--shots", 100)
        assert out.split()[1] == "FAIL"
        assert float(out.split()[0]) == pytest.approx(1 / 20)


class TestCircuit:
    @pytest.mark.parametrize("L", [2, 3])
    def test_qasm_reproduces_ground_energy(self, cli, L):
        code, out, _ = cli("circuit", "--length", L, "--qasm")
        assert code == 0
        psi = run_qasm(out)
        energy = float(np.real(psi.conj() @ dense_matrix(build_hamiltonian(L)) @ psi))
        assert abs(energy - exact_gs_energy(L)) < 1e-10
        assert out.count("measure") == 2 * L

    def test_qasm_counts(self, cli):
        _, out, _ = cli("circuit", "-L", 4, "--qasm")
        ops = [line.split()[0].split("(")[0] for line in out.splitlines()[4:] if not line.startswith("measure")]
        assert (ops.count("x"), ops.count("cx"), ops.count("ry")) == (1, 5, 6)

    def test_explicit_params_to_file(self, cli, tmp_path):
        path = tmp_path / "c.qasm"
        code, out, _ = cli("circuit", "-L", 3, "--params", "0.5,1.0", "--qasm", "--output", path)
        assert code == 0 and out == ""
        psi = run_qasm(path.read_text())
        top = [psi[1 << (5 - k)] for k in range(3)]
        np.testing.assert_allclose(np.real(top), [math.sin(0.5), math.cos(0.5) * math.sin(1.0),
                                                  math.cos(0.5) * math.cos(1.0)], atol=1e-12)

    def test_wrong_param_count(self, cli):
        code, _, err = cli("circuit", "-L", 3, "--params", "0.5")
        assert code == 2 and "params" in err

    def test_text_listing(self, cli):
        code, out, _ = cli("circuit", "-L", 2, "--params", "0.3")
        assert code == 0 and out.startswith("# qubits 4")


class TestHamiltonian:
    def test_round_trip(self, cli):
        code, out, _ = cli("hamiltonian", "-L", 3, "--U", 4.0)
        assert code == 0
        assert QubitHamiltonian.from_text(out) == build_hamiltonian(3, 1.0, 4.0)

    def test_groups(self, cli):
        _, out, _ = cli("hamiltonian", "-L", 2, "--groups")
        assert sum(line.startswith("# group") for line in out.splitlines()) == 5


class TestRun:
    ARTIFACTS = ("report.json", "results.csv", "energy.svg", "score.svg", "correction.svg", "config.txt")

    def test_noiseless_sweep_artifacts(self, cli, tmp_path):
        code, out, _ = cli("run", "--noiseless", "--l-max", 5, "--out-dir", tmp_path)
        assert code == 0
        for name in self.ARTIFACTS:
            assert (tmp_path / name).stat().st_size > 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["L_star_mitigated"] == 5 and report["N_star_mitigated"] == 10
        rows = list(csv.DictReader((tmp_path / "results.csv").open()))
        assert [int(r["N"]) for r in rows] == [4, 6, 8, 10]
        assert "L* mitigated: 5" in out
        assert (tmp_path / "energy.svg").read_text().startswith("<svg")

    def test_rerun_csv_byte_identical(self, cli, tmp_path):
        for name in ("a", "b"):
            assert cli("run", "--l-max", 3, "--seed", 7, "--out-dir", tmp_path / name)[0] == 0
        assert (tmp_path / "a" / "results.csv").read_bytes() == (tmp_path / "b" / "results.csv").read_bytes()
        assert (tmp_path / "a" / "energy.svg").read_bytes() == (tmp_path / "b" / "energy.svg").read_bytes()

    def test_config_file_then_flags(self, cli, tmp_path):
        cfg = tmp_path / "in.txt"
        cfg.write_text("shots = 1024\nL_max = 2\nthreshold = 0.002\n")
        code, _, _ = cli("run", "--config", cfg, "--shots", 2048, "--out-dir", tmp_path / "o")
        assert code == 0
        written = (tmp_path / "o" / "config.txt").read_text()
        assert "shots = 2048" in written and "threshold = 0.002" in written
        report = json.loads((tmp_path / "o" / "report.json").read_text())
        assert report["notes"] and "NON-DEFAULT THRESHOLD" in report["notes"][0]

    def test_save_counts(self, cli, tmp_path):
        assert cli("run", "--l-max", 2, "--shots", 500, "--save-counts", "--out-dir", tmp_path)[0] == 0
        files = sorted((tmp_path / "counts").iterdir())
        assert [f.name for f in files] == [f"L2_group{k}.txt" for k in range(5)]
        table = CountsTable.from_text(files[1].read_text())
        assert table.shots == 500 and table.basis == "XXZZ"

    def test_calibration_reuse(self, cli, tmp_path):
        assert cli("calibrate", "--qubits", 8, "--shots", 4000, "--out-dir", tmp_path)[0] == 0
        cal = CalibrationSet.from_text((tmp_path / "calibration.txt").read_text())
        assert cal.n_qubits == 8 and cal.shots == 4000
        code, _, _ = cli("run", "--l-max", 4, "--calibration", tmp_path / "calibration.txt",
                         "--out-dir", tmp_path / "r")
        assert code == 0
        report = json.loads((tmp_path / "r" / "report.json").read_text())
        assert all(r["mitigation_note"] == "calibration loaded from file" for r in report["results"])
        code, _, err = cli("run", "--l-max", 5, "--calibration", tmp_path / "calibration.txt",
                           "--out-dir", tmp_path / "r2")
        assert code == 2 and "calibration" in err


class TestConvergence:
    def test_trace_file(self, cli, tmp_path):
        code, out, _ = cli("convergence", "-L", 3, "--init", "zero", "--max-iter", 6, "--noiseless",
                           "--shots", 512, "--out-dir", tmp_path)
        assert code == 0
        rows = list(csv.reader((tmp_path / "convergence_L3_zero.csv").open()))
        assert rows[0][:3] == ["step", "energy", "std_error"]
        assert len(rows) == 1 + 7
        assert "exact -1.414214" in out


class TestExitCodes:
    @pytest.mark.parametrize("argv", [
        ["exact", "--length", "1"],
        ["exact"],
        [],
        ["frobnicate"],
        ["run", "--bogus"],
        ["convergence", "-L", "3", "--init", "random"],
    ])
    def test_usage(self, cli, argv):
        assert cli(*argv)[0] == 1

    @pytest.mark.parametrize("argv,field", [
        (["run", "--threshold", "-1"], "threshold"),
        (["run", "--shots", "0"], "shots"),
        (["run", "--l-min", "5", "--l-max", "3"], "L_max"),
        (["run", "--p10", "2"], "p10"),
        (["score", "--energy", "0", "-L", "2", "--threshold", "-0.1"], "threshold"),
    ])
    def test_validation(self, cli, tmp_path, argv, field):
        code, _, err = cli(*argv, "--out-dir", tmp_path)
        assert code == 2 and field in err

    def test_bad_config_file(self, cli, tmp_path):
        cfg = tmp_path / "c.txt"
        cfg.write_text("nonsense = 3\n")
        code, _, err = cli("run", "--config", cfg, "--out-dir", tmp_path)
        assert code == 2 and "nonsense" in err
        code, _, _ = cli("run", "--config", tmp_path / "missing.txt", "--out-dir", tmp_path)
        assert code == 2

    def test_runtime_failure(self, cli, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        code, _, err = cli("run", "--l-max", 2, "--out-dir", blocker / "sub")
        assert code == 3 and err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fermilength", "exact", "-L", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.strip() == "-1.000000000000"
