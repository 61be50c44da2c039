import json
import subprocess
import sys

from sgmc.cli import main
from sgmc.construction import import_generator
from sgmc.harness import read_records_csv


def test_profile_and_spectrum(capsys, tmp_path):
    assert main(["profile", "rm", "1", "3"]) == 0
    out = capsys.readouterr().out
    assert "widths 4,2,1,1" in out and "n=8 k=4" in out
    assert main(["spectrum", "2,1,1"]) == 0
    assert capsys.readouterr().out.splitlines()[1:] == ["0,1.0", "1,1.0", "2,3.5", "3,2.0", "4,0.5"]
    assert main(["spectrum", "nu", "16", "8", "4", "--random", "--out", str(tmp_path / "s.csv")]) == 0
    assert (tmp_path / "s.csv").read_text().startswith("d,A_d")


def test_sample_roundtrip(tmp_path):
    assert main(["sample", "nu", "32", "16", "8", "--seed", "4", "--out", str(tmp_path / "g.txt")]) == 0
    code = import_generator(tmp_path / "g.txt")
    assert code.seed == 4 and code.k == 16


def test_simulate_with_config_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"profile": "nu 32 16 8", "snr": [9.0], "min_errors": 5, "max_frames": 50, "delta": 4}))
    out = tmp_path / "r.csv"
    assert main(["simulate", "--config", str(cfg), "--snr", "3", "--max-frames", "300", "--out", str(out)]) == 0
    rec = read_records_csv(out)
    assert len(rec) == 1 and rec[0].snr_db == 3.0 and rec[0].frames <= 300


def test_bounds_and_errors(tmp_path, capsys):
    out = tmp_path / "b.json"
    assert main(["bounds", "--profile", "nu 32 16 8", "--snr", "3", "4", "--kinds", "UB,BonferroniLB", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert [c["kind"] for c in doc["curves"]] == ["UB", "BonferroniLB"]
    assert main(["bounds", "--profile", "nu 32 16 8", "--kinds", "bogus"]) == 2
    assert "unknown bound kinds" in capsys.readouterr().err
    assert main(["simulate", "--profile", "nu 32 16 8", "--min-errors", "0"]) == 2


def test_oracle_and_design(capsys):
    assert main(["oracle", "nu", "16", "8", "4", "--frames", "50", "--snr", "1"]) == 0
    assert "0 soft-weight mismatches" in capsys.readouterr().out
    assert main(["design-w0", "32", "16", "--target", "0.01", "--tol", "0.3", "--n-outer", "100"]) == 0
    assert "w0=" in capsys.readouterr().out


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "sgmc.cli", "profile", "nu", "8", "4", "2"], capture_output=True, text=True)
    assert r.returncode == 0 and "widths 2,2,2,2" in r.stdout
