"""Command-line interface: outputs, formats, exit codes."""

import json
import math
import subprocess
import sys

import pytest

from qubit_gp.cli import EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE, main
from qubit_gp.sweep import read_table


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_gp_rwa_unitary_limit(capsys):
    code, out, _ = run_cli(capsys, "gp-rwa", "--theta", "1.5707963", "--w", "0", "--lambda", "0.05")
    assert code == EXIT_OK
    phi_over_pi = float(out.split("phi/pi=")[1].split()[0])
    assert abs(abs(phi_over_pi) - 1.0) < 1e-6  # +-1 coincide on the principal branch


def test_gp_rwa_json_output(capsys):
    code, out, _ = run_cli(capsys, "gp-rwa", "--theta-frac", "1/3", "--json")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["method"] == "rwa-closed"
    assert payload["converged"] is True
    assert -1.0 < payload["phi_over_pi"] <= 1.0


def test_gp_jc_and_theta_frac(capsys):
    code, out, _ = run_cli(capsys, "gp-jc", "--theta-frac", "1/4", "--w", "0", "--json")
    assert code == EXIT_OK
    payload = json.loads(out)
    expected = 2.0 * math.pi * math.cos(math.pi / 8) ** 2
    assert abs(abs(payload["phi"]) - abs(expected - 2 * math.pi)) < 1e-9


def test_gp_heom_single_eval(capsys):
    code, out, _ = run_cli(
        capsys, "gp-heom", "--theta-frac", "1/3", "--w", "0.3", "--lambda", "0.5",
        "--json",
    )
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["converged"] is True
    assert payload["nodal"] is False


def test_theta_required(capsys):
    code, _, err = run_cli(capsys, "gp-rwa", "--w", "0.5")
    assert code == EXIT_CHECK_FAILED
    assert "theta" in err


def test_unknown_flag_exits_64(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gp-rwa", "--nope", "1"])
    assert exc.value.code == EXIT_USAGE


def test_unknown_command_exits_64(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == EXIT_USAGE


def test_sweep_writes_table_and_manifest(tmp_path, capsys):
    out = tmp_path / "mini.csv"
    code, stdout, _ = run_cli(
        capsys, "sweep", "--method", "rwa-closed",
        "--thetas", "0.5,1.5", "--ws", "lin:0:1.5:4", "--lambdas", "0.05",
        "--out", str(out),
    )
    assert code == EXIT_OK
    rows = read_table(out)
    assert len(rows) == 8
    manifest = json.loads((tmp_path / "mini.csv.manifest.json").read_text())
    assert manifest["specs"][0]["method"] == "rwa-closed"
    assert "wrote 8 rows" in stdout


def test_figure_5_csv(tmp_path, capsys):
    out = tmp_path / "f5.csv"
    code, stdout, _ = run_cli(capsys, "figure", "5", "--out", str(out))
    assert code == EXIT_OK
    rows = read_table(out)
    assert len(rows) == 200
    assert min(r.overlap_abs for r in rows) > 0.0
    assert all(r.method == "heom" for r in rows)


def test_outdir_env_honored(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("QUBIT_GP_OUTDIR", str(tmp_path))
    code, _, _ = run_cli(
        capsys, "sweep", "--method", "jc-limit",
        "--thetas", "0.785", "--ws", "0.2", "--out", "envtest.csv",
    )
    assert code == EXIT_OK
    assert (tmp_path / "envtest.csv").exists()


def test_validate_subset(capsys):
    code, out, _ = run_cli(capsys, "validate", "--only", "A2,A10")
    assert code == EXIT_OK
    assert "[A2] PASS" in out and "[A10] PASS" in out


def test_validate_unknown_criterion(capsys):
    code, _, err = run_cli(capsys, "validate", "--only", "A99")
    assert code == EXIT_CHECK_FAILED
    assert "A99" in err


def test_console_script_installed():
    proc = subprocess.run(
        [sys.executable, "-m", "qubit_gp.cli", "gp-rwa", "--theta-frac", "1/2", "--w", "0"],
        capture_output=True, text=True,
    )
    assert proc.returncode == EXIT_OK
    assert "phi/pi=" in proc.stdout
