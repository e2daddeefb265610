import json
import subprocess
import sys

import pytest

from troposim import cli


def run(*argv):
    return cli.main(["-q", *argv])


def test_run_explicit_solution(tmp_path):
    out = tmp_path / "r"
    assert run("run", "explicit-solution", "--mu", "1", "--alpha", "0", "--t-end", "2",
               "--dt", "2e-3", "--n1", "4", "--n2", "4", "--out", str(out)) == 0
    report = json.loads((out / "report.json").read_text())
    rate = [c for c in report["checks"] if c["name"] == "growth_rate"][0]
    assert rate["value"] == pytest.approx(-1.0, abs=1e-3)


def test_negative_mu_is_config_error(capsys):
    assert run("run", "explicit-solution", "--mu", "-1") == 1
    assert "mu must be positive" in capsys.readouterr().err


def test_growup_exits_zero(tmp_path):
    assert run("run", "growup", "--mu", "1", "--alpha", "1.5", "--n1", "4", "--n2", "4",
               "--out", str(tmp_path / "g")) == 0
    report = json.loads((tmp_path / "g" / "report.json").read_text())
    assert report["status"] == "blowup"
    rate = [c for c in report["checks"] if c["name"] == "growth_rate"][0]
    assert rate["value"] == pytest.approx(0.5, abs=1e-3)


def test_unexpected_divergence_exit_code(tmp_path):
    assert run("run", "explicit-solution", "--alpha", "4", "--dt", "0.05", "--t-end", "20",
               "--n1", "3", "--n2", "3", "--out", str(tmp_path / "d")) == 3


def test_check_failure_exit_code(tmp_path):
    # steady-state drift tolerance cannot hold with a wrong closed form (alpha != mu)
    cfg = tmp_path / "c.toml"
    cfg.write_text("""
[[scenario]]
name = "wrong-rate"
[scenario.params]
mu = 1.0
alpha = 0.0
[scenario.stepper]
dt = 0.01
t_end = 1.0
[scenario.truncation]
n1 = 3
n2 = 3
[[scenario.checks]]
kind = "growth_rate"
expected = 0.0
tol = 1e-3
""")
    assert run("run", str(cfg), "--out", str(tmp_path / "w")) == 2


def test_malformed_config(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[[scenario]]\nname = \n")
    assert run("run", str(cfg)) == 1
    assert "line 2" in capsys.readouterr().err


def test_output_root_env(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path / "root"))
    assert run("run", "explicit-solution", "--t-end", "1", "--dt", "2e-3", "--n1", "3",
               "--n2", "3", "--probe-every", "5") == 0
    assert (tmp_path / "root" / "explicit-solution" / "diagnostics.csv").exists()


def test_verify_passes_and_inject_bug_fails(capsys):
    assert run("verify", "--n1", "6", "--n2", "6", "--count", "10") == 0
    table = capsys.readouterr().out
    assert "skew_symmetry" in table and "NO" not in table
    assert run("verify", "--n1", "6", "--n2", "6", "--count", "10", "--inject-bug") == 2
    assert "NO" in capsys.readouterr().out


def test_shortened_decay_fails_its_check(tmp_path):
    # decay below 1e-6 is demanded at t = 40, which a t_end = 1 run never reaches
    assert run("run", "decay", "--t-end", "1", "--n1", "3", "--n2", "3",
               "--out", str(tmp_path / "d")) == 2


def test_verify_zero_count_is_vacuous(capsys):
    assert run("verify", "--count", "0") == 0


def test_resume_cases(tmp_path):
    assert run("resume", str(tmp_path / "missing.json")) == 1
    out = tmp_path / "c"
    assert run("run", "explicit-solution", "--t-end", "1", "--dt", "2e-3", "--n1", "3",
               "--n2", "3", "--out", str(out), "--checkpoint-every", "50") == 0
    assert run("resume", str(out / "checkpoint.json")) == 0


def test_regime_and_list(capsys):
    assert run("regime", "--mu", "1", "--alpha", "0", "--beta", "0.25") == 0
    assert capsys.readouterr().out.startswith("attractor-regime omega=0.2146")
    assert run("list") == 0
    assert "oracle-crosscheck" in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "troposim", "regime", "--mu", "1",
                           "--alpha", "1.5"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("grow-up-candidate")
