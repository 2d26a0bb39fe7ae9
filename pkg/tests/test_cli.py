import subprocess
import sys

import pytest

from metricamp.cli import main

SPEC = """
name = wse_awgn
N = 200
J_list = 1
R_list = 0.5
noise_list = 0.01
rho = 0.1
metric = mwse:beta=0.2
trials = 2
base_seed = 5
gamp.damping = 0.1
output_path = {out}
"""


def test_run_twice_byte_identical(tmp_path):
    spec_path = tmp_path / "exp.spec"
    out = tmp_path / "exp.csv"
    spec_path.write_text(SPEC.format(out=out))
    assert main(["run", str(spec_path), "--seed", "42"]) == 0
    first = out.read_bytes()
    assert main(["run", str(spec_path), "--seed", "42"]) == 0
    assert out.read_bytes() == first


def test_seed_override_changes_output(tmp_path):
    spec_path = tmp_path / "exp.spec"
    out = tmp_path / "exp.csv"
    spec_path.write_text(SPEC.format(out=out))
    main(["run", str(spec_path), "--seed", "1"])
    first = out.read_bytes()
    main(["run", str(spec_path), "--seed", "2"])
    assert out.read_bytes() != first


def test_limits_mmwse_prints_expected_value(capsys):
    assert main(["limits", "--mmwse", "--delta-v", "1", "--rho", "0.1",
                 "--beta", "0.2", "--J", "2"]) == 0
    line = capsys.readouterr().out.strip()
    value = float(line.split("value=")[1].split()[0])
    assert round(value, 5) == 0.07111


def test_limits_csv_sweep(tmp_path):
    out = tmp_path / "curve.csv"
    assert main(["limits", "--mmwse", "--delta-v", "0.05,0.1,0.2", "--rho", "0.1",
                 "--beta", "0.2", "--J", "3", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("delta_v,J,rho,beta,value,p_fa,p_miss,method")
    assert len(lines) == 4


def test_missing_spec_file_exit_code(capsys):
    assert main(["run", "missing.spec"]) == 2
    assert "spec error" in capsys.readouterr().err


def test_malformed_spec_exit_code(tmp_path, capsys):
    spec_path = tmp_path / "bad.spec"
    spec_path.write_text("name = wse_awgn\nwhat is this line\n")
    assert main(["run", str(spec_path)]) == 2
    assert "key = value" in capsys.readouterr().err


def test_aud_subcommand_requires_aud_spec(tmp_path, capsys):
    spec_path = tmp_path / "exp.spec"
    spec_path.write_text(SPEC.format(out=tmp_path / "o.csv"))
    assert main(["aud", str(spec_path)]) == 2
    assert "requires a spec" in capsys.readouterr().err


def test_numeric_failure_exit_code(tmp_path, monkeypatch, capsys):
    from metricamp import cli
    from metricamp.limits import NumericError

    def boom(spec, threads=1):
        raise NumericError("synthetic failure")

    monkeypatch.setattr(cli, "run_experiment", boom)
    spec_path = tmp_path / "exp.spec"
    spec_path.write_text(SPEC.format(out=tmp_path / "o.csv"))
    assert main(["run", str(spec_path)]) == 3
    assert "numeric failure" in capsys.readouterr().err


def test_full_flag_switches_to_paper_scale(tmp_path, monkeypatch):
    from metricamp import cli

    seen = {}

    def capture(spec, threads=1):
        seen["N"], seen["trials"] = spec.N, spec.trials
        return []

    monkeypatch.setattr(cli, "run_experiment", capture)
    spec_path = tmp_path / "exp.spec"
    spec_path.write_text(SPEC.format(out=tmp_path / "o.csv"))
    assert main(["run", str(spec_path), "--full"]) == 0
    assert seen == {"N": 10_000, "trials": 50}


def test_gamp_trace_subcommand(tmp_path):
    spec_path = tmp_path / "exp.spec"
    out = tmp_path / "trace.csv"
    spec_path.write_text(SPEC.format(out=tmp_path / "unused.csv"))
    assert main(["gamp-trace", str(spec_path), "--out", str(out)]) == 0
    assert out.read_text().startswith("iteration,delta,delta_v")


def test_console_script_entry_point(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "metricamp.cli", "limits", "--mmwse",
         "--delta-v", "1", "--rho", "0.1", "--beta", "0.2", "--J", "2"],
        capture_output=True, text=True)
    assert result.returncode == 0
    assert "value=" in result.stdout


def test_invert_and_se_modes(capsys):
    assert main(["limits", "--invert-mmse", "--target", "0.05", "--rho", "0.1",
                 "--J", "1"]) == 0
    out = capsys.readouterr().out
    assert "value=" in out
    assert main(["limits", "--se", "--R", "0.5", "--rho", "0.1", "--J", "1",
                 "--delta-z", "0.01"]) == 0
    out = capsys.readouterr().out
    value = float(out.split("value=")[1].split()[0])
    assert 0.0 < value < 1.0
