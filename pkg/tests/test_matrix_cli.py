import csv

import pytest

from dshrpl.cli import main
from dshrpl.errors import ConfigurationError
from dshrpl.matrix import (DEFAULT_MATRIX, ERROR, Cell, metric_csv, parse_matrix, rows_from_dir,
                           run_matrix, summarize, write_outputs)
from dshrpl.metrics import MetricsRow

TINY = """\
[matrix]
reps = 1
seed_base = 2
defense_modes = dsh-rpl, off

[defaults]
num_nodes = 12
area = 100, 100
duration = 100

[scenario 1]
sinkhole_rate = 0.2
"""


def read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_default_matrix_shape():
    spec = parse_matrix(DEFAULT_MATRIX)
    sweep = sorted({c.attack_interval for c in spec.cells if c.scenario == 4})
    assert sweep == [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5]
    assert {c.attack_interval for c in spec.cells if c.scenario < 4} == {2.0}
    assert len(spec.cells) == (3 + 7) * 2 * 5
    rates = {c.scenario: c.config.sinkhole_rate for c in spec.cells}
    assert rates == {1: 0.1, 2: 0.2, 3: 0.3, 4: 0.3}


def test_bad_matrix_files():
    for text in ["[matrix]\nreps = 0\n[scenario 1]\n", "[matrix]\nreps = 1\n",
                 "[scenario x]\n", "[matrix]\ndefense_modes = maybe\n[scenario 1]\n",
                 "[scenario 1]\nnum_nodes = lots\n"]:
        with pytest.raises(ConfigurationError):
            parse_matrix(text)


def test_minimal_matrix_is_byte_identical_on_rerun(tmp_path):
    m = tmp_path / "m.ini"
    m.write_text(TINY)
    rows, paths = run_matrix(m, tmp_path / "a")
    run_matrix(m, tmp_path / "b")
    for name in ("dr", "fpr", "fnr", "pdr", "summary"):
        assert (tmp_path / "a" / f"{name}.csv").read_bytes() == (tmp_path / "b" / f"{name}.csv").read_bytes()
    table = read(paths["pdr"])
    assert table[0] == ["scenario", "attack_interval", "defense_mode", "seed", "value"]
    assert [r[2] for r in table[1:]] == ["dsh-rpl", "off"]
    assert all(r[3] == "2" for r in table[1:])
    assert b"\r" not in paths["pdr"].read_bytes()
    back = rows_from_dir(tmp_path / "a")
    assert [(r.defense_mode, r.pdr) for r in back] == [(r.defense_mode, round(r.pdr, 4)) for r in rows]


def test_failed_cells_become_error_rows(tmp_path):
    rows = [MetricsRow(1, 2.0, "dsh-rpl", 1, 100.0, 0.0, 0.0, 95.5),
            MetricsRow(1, 2.0, "dsh-rpl", 2, None, None, None, None, 0.0, "TopologyError: boom")]
    paths = write_outputs(rows, tmp_path)
    assert read(paths["dr"])[2][-1] == ERROR
    assert read(paths["errors"])[1][-1] == "TopologyError: boom"
    s = [x for x in summarize(rows) if x.metric == "pdr"][0]
    assert (s.n, s.mean, s.sd, s.errors) == (1, 95.5, 0.0, 1)


def test_na_and_summary_statistics():
    rows = [MetricsRow(1, 2.0, "off", seed, None, 0.0, None, pdr) for seed, pdr in ((1, 90.0), (2, 80.0))]
    assert metric_csv(rows, "dr").splitlines()[1].endswith(",NA")
    assert metric_csv(rows, "pdr").splitlines()[1] == "1,2.0000,off,1,90.0000"
    pdr = [x for x in summarize(rows) if x.metric == "pdr"][0]
    assert pdr.mean == 85.0 and pdr.sd == pytest.approx(7.0710678)
    dr = [x for x in summarize(rows) if x.metric == "dr"][0]
    assert dr.n == 0 and dr.mean is None


def test_cli_run_writes_outputs(tmp_path, capsys):
    cfg = tmp_path / "c.txt"
    cfg.write_text("num_nodes = 10\narea = 90, 90\nduration = 50\nsinkhole_rate = 0.2\n")
    out = tmp_path / "run"
    assert main(["run", "--config", str(cfg), "--seed", "3", "--out", str(out), "--defense", "off"]) == 0
    for name in ("trace.tsv", "dodag.txt", "config.txt", "metrics.csv", "quarantine.tsv"):
        assert (out / name).exists()
    assert "defense=off" in capsys.readouterr().out
    assert read(out / "metrics.csv")[1][:2] == ["3", "off"]
    assert "seed = 3" in (out / "config.txt").read_text()


def test_cli_matrix_and_report(tmp_path, capsys):
    m = tmp_path / "m.ini"
    m.write_text(TINY)
    assert main(["matrix", "--matrix", str(m), "--out", str(tmp_path / "o"), "--jobs", "2"]) == 0
    capsys.readouterr()
    assert main(["report", "--in", str(tmp_path / "o"), "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "metric,scenario,attack_interval,defense_mode,n,mean,sd,errors"
    assert len(lines) == 1 + 4 * 2
    assert main(["report", "--in", str(tmp_path / "o")]) == 0
    assert "fnr = 100*FN/(FN+TP)" in capsys.readouterr().out


def test_cli_errors_exit_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("num_nodes = -3\n")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2
    assert "error:" in capsys.readouterr().err
    assert main(["report", "--in", str(tmp_path / "missing")]) == 2
    with pytest.raises(SystemExit):
        main(["run"])
