import xml.etree.ElementTree as ET

from mppi_dock.cli import EXIT_CONFIG, EXIT_IO, main

QUICK = "[mppi]\nK = 32\nT = 8\n[scenario]\ntime_limit = 0.5\n"


def _cfg(tmp_path, text=QUICK):
    p = tmp_path / "quick.ini"
    p.write_text(text)
    return str(p)


def test_run_and_replay(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--scenario", "2", "--seed", "1", "--config", _cfg(tmp_path), "--out", str(out),
                 "--plot"]) == 0
    log = out / "scenario2_seed1.csv"
    assert log.exists() and (out / "scenario2_seed1.svg").exists()
    assert "timeout" in capsys.readouterr().out
    svg = tmp_path / "replay.svg"
    assert main(["replay", "--log", str(log), "--plot", "--out", str(svg)]) == 0
    ET.parse(svg)


def test_suite(tmp_path):
    out = tmp_path / "suite"
    assert main(["suite", "--config", _cfg(tmp_path), "--seeds", "2", "--scenarios", "1", "--out", str(out),
                 "--no-logs"]) == 0
    lines = (out / "summary.csv").read_text().splitlines()
    assert len(lines) == 2 and lines[1].startswith("1,2,")
    assert not list(out.glob("scenario*.csv"))


def test_exit_codes(tmp_path):
    bad = _cfg(tmp_path, "[mppi]\nbogus = 1\n")
    assert main(["run", "--config", bad, "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["run", "--config", str(tmp_path / "missing.ini"), "--out", str(tmp_path)]) == EXIT_IO
    assert main(["replay", "--log", str(tmp_path / "missing.csv")]) == EXIT_IO
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["replay", "--log", str(empty)]) == EXIT_IO
