import filecmp
from pathlib import Path

import pytest

from cwsense import __version__
from cwsense.harness.cli import cli_main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_no_arguments(capsys):
    assert cli_main([]) == 1
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["bogus"], ["plan", "--nope"], ["simulate", "--trials", "x"]])
def test_usage_errors(argv, capsys):
    assert cli_main(argv) == 1
    assert "usage" in capsys.readouterr().err


def test_version(capsys):
    assert cli_main(["version"]) == 0
    assert capsys.readouterr().out.strip() == __version__


def test_plan_prints_nine_sections(capsys):
    assert cli_main(["plan", "--config", str(CONFIGS / "paper_plan.toml")]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("9 sections")
    assert len(out) == 10


def test_missing_config_is_config_error(tmp_path, capsys):
    assert cli_main(["simulate", "--config", str(tmp_path / "none.toml")]) == 1
    assert cli_main(["plan"]) == 1
    bad = tmp_path / "bad.toml"
    bad.write_text("[signal]\nsnr = 3\n")
    assert cli_main(["simulate", "--config", str(bad)]) == 1
    assert cli_main(["simulate", "--config", str(CONFIGS / "paper.toml"), "--solver", "x"]) == 1


def test_runtime_failure_exit_two(tmp_path):
    cfg = tmp_path / "c.toml"
    # calibration needs a finite SNR; this only fails once the run starts
    cfg.write_text((CONFIGS / "paper.toml").read_text()
                   .replace('path = "paper_plan.toml"', f'path = "{CONFIGS / "paper_plan.toml"}"')
                   .replace("snr_db = 13.0", "snr_db = inf"))
    assert cli_main(["simulate", "--config", str(cfg), "--trials", "1", "--quiet",
                     "--out", str(tmp_path / "o")]) == 2


def test_simulate_deterministic_outputs(tmp_path):
    args = ["simulate", "--config", str(CONFIGS / "paper.toml"), "--trials", "2", "--seed", "7",
            "--quiet"]
    assert cli_main(args + ["--out", str(tmp_path / "a"), "--dump-measurement", "1"]) == 0
    assert cli_main(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("trials.csv", "summary.csv", "summary.json", "spectrum_trial0.csv"):
        assert filecmp.cmp(tmp_path / "a" / name, tmp_path / "b" / name, shallow=False), name
    assert (tmp_path / "a" / "timing.csv").exists()

    dump = tmp_path / "a" / "measurement_1.npz"
    assert cli_main(["solve", "--config", str(CONFIGS / "paper.toml"), "--input", str(dump),
                     "--solver", "mndo", "--out", str(tmp_path / "s"), "--quiet"]) == 0
    assert (tmp_path / "s" / "recovery_mndo.csv").exists()
