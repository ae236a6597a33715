import json
import subprocess
import sys

import pytest
import yaml

from popt.cli import main


def test_unknown_experiment_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["run", "fig9", "--out", "x"])
    assert info.value.code == 2


def test_validate_ok_and_failure(tmp_path, capsys):
    good = tmp_path / "good.yaml"
    good.write_text(yaml.safe_dump({"seed": 1}))
    assert main(["validate", "--config", str(good)]) == 0
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump({"election": {"mu1": 0.7, "mu2": 0.5}}))
    assert main(["validate", "--config", str(bad)]) == 1
    assert "election.mu1+mu2" in capsys.readouterr().err


def test_run_writes_tables(tmp_path, capsys):
    assert main(["run", "fig5a", "--seed", "4", "--out", str(tmp_path), "--no-plots"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["files"] == ["fig5a.csv"]
    assert (tmp_path / "fig5a.csv").exists() and (tmp_path / "fig5a.csv.meta.json").exists()


def test_bad_config_on_run(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump({"reward": {"k": 2.0}}))
    assert main(["run", "fig5a", "--config", str(bad), "--out", str(tmp_path)]) == 1


def test_seed_must_be_u64():
    with pytest.raises(SystemExit):
        main(["run", "fig5a", "--seed", str(2**64), "--out", "x"])


def test_bench_election(capsys):
    assert main(["bench-election", "--na", "20"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["na"] == 20 and body["seconds"] > 0
    assert main(["bench-election", "--na", "0"]) == 2


def test_console_entry_and_log_env(tmp_path):
    env = {"POPT_LOG_LEVEL": "debug", "PATH": "/usr/bin:/bin"}
    out = subprocess.run([sys.executable, "-m", "popt.cli", "run", "fig6a", "--out", str(tmp_path),
                          "--no-plots"], capture_output=True, text=True, env=env)
    assert out.returncode == 0
    assert "DEBUG" in out.stderr or "INFO" in out.stderr
