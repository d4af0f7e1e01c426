import os
import subprocess
import sys

import pytest

from vof2d.cli import main, parse_levels
from vof2d.diagnostics import read_diagnostics

HERE = os.path.dirname(__file__)
CONFIGS = os.path.join(HERE, "..", "configs")


def write_cfg(path, text):
    path.write_text(text)
    return str(path)


def test_missing_config_exits_2(tmp_path):
    assert main(["run", str(tmp_path / "nope.cfg")]) == 2


def test_bad_config_exits_2(tmp_path):
    p = write_cfg(tmp_path / "bad.cfg", "scenario = translate_line\ngrid.colour = red\n")
    assert main(["run", p]) == 2


def test_usage_error_exits_2():
    assert main(["frobnicate"]) == 2
    assert main([]) == 2


def test_parse_levels():
    assert parse_levels("4..9") == (4, 9)
    import argparse
    with pytest.raises(argparse.ArgumentTypeError):
        parse_levels("9..4")


def test_run_translate_end_to_end(tmp_path):
    out = tmp_path / "out"
    cfg = os.path.join(CONFIGS, "translate.cfg")
    assert main(["--output-dir", str(out), "run", cfg]) == 0
    rows = read_diagnostics(str(out / "diagnostics.csv"))
    assert rows[0]["step"] == 0 and rows[-1]["time"] == 1.0
    assert [r["step"] for r in rows] == list(range(len(rows)))
    assert rows[-1]["l1_error"] <= 1e-12
    assert (out / "fields_final.csv").exists() and (out / "interface_final.csv").exists()


def test_output_times_produce_snapshots(tmp_path):
    p = write_cfg(tmp_path / "r.cfg", "scenario = rotate_circle\ngrid.nx = 16\ngrid.ny = 16\n"
                  "time.t_end = 0.5\noutput.times = 0.25, 0.5\n")
    out = tmp_path / "o"
    assert main(["--output-dir", str(out), "run", p]) == 0
    assert (out / "fields_t0.25.csv").exists() and (out / "fields_t0.5.csv").exists()
    assert not (out / "fields_final.csv").exists()


def test_convergence_table_csv(tmp_path):
    p = write_cfg(tmp_path / "r.cfg", "scenario = rotate_circle\ntime.t_end = 0.25\n")
    out = tmp_path / "c"
    assert main(["--output-dir", str(out), "convergence", p, "--levels", "3..5"]) == 0
    lines = (out / "convergence.csv").read_text().splitlines()
    assert lines[0] == "h,l1_error,rate"
    assert len(lines) == 4 and lines[1].endswith(",")
    assert all(float(l.split(",")[2]) > 0 for l in lines[2:])


def test_convergence_without_exact_solution_exits_2(tmp_path):
    p = write_cfg(tmp_path / "v.cfg", "scenario = van_keken\ntime.t_end = 0\n")
    assert main(["--output-dir", str(tmp_path / "v"), "convergence", p, "--levels", "3..3"]) == 2


def test_numerical_failure_exits_1(tmp_path, monkeypatch, capsys):
    import vof2d.cli as cli
    from vof2d.advect import BoundednessError

    def boom(*a, **k):
        raise BoundednessError("f = 1.5 in cell (3, 4)")

    monkeypatch.setattr(cli, "run_simulation", boom)
    p = os.path.join(CONFIGS, "translate.cfg")
    assert main(["--output-dir", str(tmp_path / "f"), "run", p]) == 1
    assert "BoundednessError" in capsys.readouterr().err


def test_out_of_range_cfl_exits_2(tmp_path):
    p = write_cfg(tmp_path / "f.cfg", "scenario = translate_line\ntime.cfl = 2.5\n")
    assert main(["--output-dir", str(tmp_path / "f"), "run", p]) == 2


def test_console_entry_point(tmp_path):
    cfg = os.path.join(CONFIGS, "translate.cfg")
    r = subprocess.run([sys.executable, "-m", "vof2d.cli", "--output-dir", str(tmp_path), "run", cfg],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert "l1_error" in r.stdout
