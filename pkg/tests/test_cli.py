import csv
import io
from pathlib import Path

import pytest

from relaxnet.cli import main

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def _small(tmp_path, extra=""):
    p = tmp_path / "tiny.ini"
    p.write_text("topology = merge\nrho_init = 0.1 0.15 0.2\nn_cells = 40\nt_end = 0.1\n" + extra)
    return p


def test_simulate_writes_files(tmp_path, capsys):
    assert main(["simulate", str(_small(tmp_path)), "--out", str(tmp_path / "out")]) == 0
    assert "l1_interior" in capsys.readouterr().out
    assert (tmp_path / "out" / "tiny_report.csv").exists()


def test_sweep(tmp_path, capsys):
    assert main(["sweep", str(_small(tmp_path)), "--eps", "1e-2,1e-3", "--out", str(tmp_path), "--jobs", "1"]) == 0
    assert capsys.readouterr().out.count("epsilon=") == 2


def test_match_table(capsys):
    assert main(["match", "--grid", "3"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["rho_B1", "rho_B2", "rho_B3", "C1", "C2", "C3", "rho0", "case_tag"]
    assert len(rows) == 28


def test_match_to_file(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["match", "--grid", "2", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 9


def test_bad_scenario_exit_code(tmp_path, capsys):
    assert main(["simulate", str(_small(tmp_path, "epsilon = 0\n"))]) == 2
    assert "epsilon" in capsys.readouterr().err


def test_selftest_small(capsys):
    code = main(["selftest", "--scenarios", "3", "--inputs", "200"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.count("[PASS]") == 5


def test_unknown_command():
    with pytest.raises(SystemExit):
        main(["dance"])
