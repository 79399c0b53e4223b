import csv
import json
import subprocess
import sys

import pytest

from antiplane.cli import ConfigError, RunConfig, main, run


def read_csv(path):
    with open(path, newline="") as fh:
        first = fh.readline()
        rows = list(csv.reader(fh))
    assert first.startswith("# config: ")
    return json.loads(first[len("# config: "):]), rows[0], rows[1:]


def summary(path):
    return dict(line.split(": ", 1) for line in path.read_text().splitlines())


def test_solve(tmp_path):
    assert main(["solve", "--radius", "16", "--eps", "0.01", "--out", str(tmp_path)]) == 0
    cfg, header, rows = read_csv(tmp_path / "field.csv")
    assert header == ["l1", "l2", "x1", "x2", "u"]
    assert cfg["radius"] == 16 and cfg["eps"] == 0.01 and cfg["command"] == "solve"
    assert all(float(r[2]) == int(r[0]) - 0.5 for r in rows)
    s = summary(tmp_path / "summary.txt")
    assert int(s["iterations"]) <= 8
    assert 0 < float(s["lambda_min"]) <= 1


def test_solve_is_byte_identical(tmp_path):
    argv = ["solve", "--radius", "16", "--out", str(tmp_path)]
    assert main(argv) == 0
    first = (tmp_path / "field.csv").read_bytes()
    assert main(argv) == 0
    assert (tmp_path / "field.csv").read_bytes() == first


def test_values_round_trip(tmp_path):
    from antiplane import EnergyModel, LatticeDomain, newton
    main(["solve", "--radius", "12", "--eps", "0.05", "--out", str(tmp_path)])
    _, _, rows = read_csv(tmp_path / "field.csv")
    ref = newton(EnergyModel(LatticeDomain(12), 0.05)).final_field.values
    assert [float(r[4]) for r in rows] == ref.tolist()


def test_decay(tmp_path):
    assert main(["decay", "--radius", "32", "--eps", "0.01", "--out", str(tmp_path)]) == 0
    _, header, rows = read_csv(tmp_path / "decay.csv")
    assert header == ["r", "envelope"]
    assert len(rows) > 10
    assert -2.0 < float(summary(tmp_path / "summary.txt")["slope"]) < -1.0


def test_converge(tmp_path):
    argv = ["converge", "--radii", "8", "12", "--ref-radius", "48", "--out", str(tmp_path)]
    assert main(argv) == 0
    cfg, header, rows = read_csv(tmp_path / "converge.csv")
    assert header == ["R", "err_h1"]
    assert cfg["radii"] == [8.0, 12.0] and cfg["ref_radius"] == 48.0
    assert [float(r[0]) for r in rows] == [8.0, 12.0]


def test_green(tmp_path):
    argv = ["green", "--radius", "24", "--source", "5", "4", "--out", str(tmp_path)]
    assert main(argv) == 0
    cfg, header, rows = read_csv(tmp_path / "green.csv")
    assert header == ["l1", "l2", "s1", "s2", "G", "mixedD", "bound"]
    assert cfg["source"] == [5, 4]
    assert rows and all(r[2:4] == ["5", "4"] for r in rows)
    assert float(summary(tmp_path / "summary.txt")["delta_residual_max"]) < 1e-10


def test_check(tmp_path, capsys):
    assert main(["check", "--out", str(tmp_path)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4 and all(l.startswith("PASS") for l in lines)


@pytest.mark.parametrize("cfg", [
    RunConfig("solve", radius=4),
    RunConfig("solve", eps=-1.0),
    RunConfig("solve", tol=0.0),
    RunConfig("fly"),
    RunConfig("converge", radii=[16, 32], ref_radius=100),
    RunConfig("green", radius=24, source=(20, 9)),
    RunConfig("green", boundary="open"),
])
def test_invalid_configs(cfg, tmp_path, capsys):
    cfg.out_path = str(tmp_path)
    with pytest.raises(ConfigError):
        cfg.validate()
    assert run(cfg) == 2
    assert "error" in capsys.readouterr().err
    assert not (tmp_path / "summary.txt").exists()


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "antiplane", "--version"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "0.1.0"
