"""Scenario matrix runner: many seeded runs reduced to per-metric CSV files.

A matrix file is INI-style. ``[matrix]`` holds ``reps``, ``seed_base`` and
``defense_modes``; ``[defaults]`` holds scenario keys shared by every
scenario; each ``[scenario N]`` section overrides them. ``attack_interval``
may list several comma-separated values, which are swept.
"""

from __future__ import annotations

import configparser
import csv
import io
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import ConfigurationError
from .metrics import MetricsRow
from .sim.config import ScenarioConfig, config_from_mapping
from .sim.scenario import run_scenario

METRICS = ("dr", "fpr", "fnr", "pdr")
DEFENSE_MODES = ("dsh-rpl", "off")
CSV_HEADER = ("scenario", "attack_interval", "defense_mode", "seed", "value")
NA = "NA"
ERROR = "ERROR"

# scenarios 1-3 differ by attacker share; 4 sweeps the activation interval
DEFAULT_MATRIX = """\
[matrix]
reps = 5
seed_base = 1
defense_modes = dsh-rpl, off

[defaults]
num_nodes = 50
area = 200, 200
duration = 200

[scenario 1]
sinkhole_rate = 0.1
attack_interval = 2.0

[scenario 2]
sinkhole_rate = 0.2
attack_interval = 2.0

[scenario 3]
sinkhole_rate = 0.3
attack_interval = 2.0

[scenario 4]
sinkhole_rate = 0.3
stagger = true
attack_interval = 0.5, 1, 1.5, 2, 2.5, 3, 3.5
"""


@dataclass(frozen=True)
class Cell:
    scenario: int
    attack_interval: float
    defense_mode: str
    seed: int
    config: ScenarioConfig

    @property
    def key(self):
        return (self.scenario, self.attack_interval, DEFENSE_MODES.index(self.defense_mode), self.seed)


@dataclass(frozen=True)
class MatrixSpec:
    reps: int
    seed_base: int
    defense_modes: Tuple[str, ...]
    cells: Tuple[Cell, ...]


def _split(text: str) -> List[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def parse_matrix(text: str) -> MatrixSpec:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"unreadable matrix file: {exc}") from exc
    head = cp["matrix"] if cp.has_section("matrix") else {}
    try:
        reps = int(head.get("reps", "1"))
        seed_base = int(head.get("seed_base", "1"))
    except ValueError as exc:
        raise ConfigurationError(f"bad [matrix] value: {exc}") from exc
    if reps < 1:
        raise ConfigurationError("reps must be at least 1")
    modes = tuple(_split(head.get("defense_modes", ", ".join(DEFENSE_MODES))))
    for m in modes:
        if m not in DEFENSE_MODES:
            raise ConfigurationError(f"unknown defense mode {m!r}")
    defaults = dict(cp["defaults"]) if cp.has_section("defaults") else {}
    cells = []
    scenario_sections = [s for s in cp.sections() if s.lower().startswith("scenario")]
    if not scenario_sections:
        raise ConfigurationError("matrix defines no [scenario N] section")
    for section in scenario_sections:
        try:
            sid = int(section.split()[1])
        except (IndexError, ValueError) as exc:
            raise ConfigurationError(f"section {section!r} must be named 'scenario <number>'") from exc
        values = {**defaults, **dict(cp[section])}
        intervals = _split(values.pop("attack_interval", "2.0"))
        for iv_text in intervals:
            for mode in modes:
                for rep in range(reps):
                    seed = seed_base + rep
                    cfg = config_from_mapping({
                        **values, "attack_interval": iv_text, "seed": str(seed),
                        "defense": "true" if mode == "dsh-rpl" else "false",
                        "keep_records": "false",
                    })
                    cells.append(Cell(sid, float(iv_text), mode, seed, cfg))
    return MatrixSpec(reps, seed_base, modes, tuple(sorted(cells, key=lambda c: c.key)))


def load_matrix(path, reps: Optional[int] = None) -> MatrixSpec:
    text = Path(path).read_text(encoding="utf-8")
    if reps is not None:
        cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        cp.optionxform = str
        cp.read_string(text)
        if not cp.has_section("matrix"):
            cp.add_section("matrix")
        cp["matrix"]["reps"] = str(reps)
        buf = io.StringIO()
        cp.write(buf)
        text = buf.getvalue()
    return parse_matrix(text)


def run_cell(cell: Cell) -> MetricsRow:
    try:
        res = run_scenario(cell.config)
        return res.metrics_row(cell.scenario, cell.defense_mode)
    except Exception as exc:   # a failed cell becomes an error row; the matrix goes on
        return MetricsRow(cell.scenario, cell.attack_interval, cell.defense_mode, cell.seed,
                          None, None, None, None, 0.0, f"{type(exc).__name__}: {exc}")


def run_cells(cells: Sequence[Cell], jobs: int = 1) -> List[MetricsRow]:
    if jobs <= 1:
        rows = [run_cell(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_cell, cells))
    order = {DEFENSE_MODES[i]: i for i in range(len(DEFENSE_MODES))}
    return sorted(rows, key=lambda r: (r.scenario, r.attack_interval, order[r.defense_mode], r.seed))


def fmt(value: Optional[float]) -> str:
    return NA if value is None else f"{value:.4f}"


def metric_csv(rows: Sequence[MetricsRow], metric: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        value = ERROR if r.error else fmt(getattr(r, metric))
        w.writerow((r.scenario, f"{r.attack_interval:.4f}", r.defense_mode, r.seed, value))
    return buf.getvalue()


@dataclass(frozen=True)
class SummaryRow:
    metric: str
    scenario: int
    attack_interval: float
    defense_mode: str
    n: int
    mean: Optional[float]
    sd: Optional[float]
    errors: int


def summarize(rows: Sequence[MetricsRow]) -> List[SummaryRow]:
    """Mean and sample standard deviation per (metric, cell), ignoring NA values."""
    groups: Dict[tuple, List[MetricsRow]] = {}
    for r in rows:
        groups.setdefault((r.scenario, r.attack_interval, r.defense_mode), []).append(r)
    out = []
    for metric in METRICS:
        for (sid, iv, mode), members in groups.items():
            vals = [getattr(r, metric) for r in members if not r.error and getattr(r, metric) is not None]
            errs = sum(1 for r in members if r.error)
            mean = statistics.fmean(vals) if vals else None
            sd = statistics.stdev(vals) if len(vals) > 1 else (0.0 if vals else None)
            out.append(SummaryRow(metric, sid, iv, mode, len(vals), mean, sd, errs))
    return out


def summary_csv(summary: Sequence[SummaryRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("metric", "scenario", "attack_interval", "defense_mode", "n", "mean", "sd", "errors"))
    for s in summary:
        w.writerow((s.metric, s.scenario, f"{s.attack_interval:.4f}", s.defense_mode, s.n,
                    fmt(s.mean), fmt(s.sd), s.errors))
    return buf.getvalue()


def write_outputs(rows: Sequence[MetricsRow], out_dir) -> Dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for metric in METRICS:
        p = out / f"{metric}.csv"
        p.write_text(metric_csv(rows, metric), encoding="utf-8", newline="")
        paths[metric] = p
    p = out / "summary.csv"
    p.write_text(summary_csv(summarize(rows)), encoding="utf-8", newline="")
    paths["summary"] = p
    errs = [r for r in rows if r.error]
    if errs:
        p = out / "errors.csv"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("scenario", "attack_interval", "defense_mode", "seed", "error"))
        for r in errs:
            w.writerow((r.scenario, f"{r.attack_interval:.4f}", r.defense_mode, r.seed, r.error))
        p.write_text(buf.getvalue(), encoding="utf-8", newline="")
        paths["errors"] = p
    return paths


def run_matrix(matrix_path, out_dir, reps: Optional[int] = None, jobs: int = 1):
    """Run every cell of a matrix file and write the CSV outputs.

    Returns ``(rows, paths)``; rows include error rows for failed cells.
    """
    spec = load_matrix(matrix_path, reps)
    rows = run_cells(spec.cells, jobs)
    return rows, write_outputs(rows, out_dir)


def read_metric_csv(path) -> List[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def rows_from_dir(in_dir) -> List[MetricsRow]:
    """Rebuild metric rows from the per-metric CSVs of a finished matrix."""
    d = Path(in_dir)
    tables = {m: read_metric_csv(d / f"{m}.csv") for m in METRICS}
    rows = []
    for recs in zip(*(tables[m] for m in METRICS)):
        base = recs[0]
        vals = {}
        error = None
        for m, rec in zip(METRICS, recs):
            v = rec["value"]
            if v == ERROR:
                error = "error"
                vals[m] = None
            else:
                vals[m] = None if v == NA else float(v)
        rows.append(MetricsRow(int(base["scenario"]), float(base["attack_interval"]),
                               base["defense_mode"], int(base["seed"]),
                               vals["dr"], vals["fpr"], vals["fnr"], vals["pdr"], 0.0, error))
    return rows


def summary_table(summary: Sequence[SummaryRow]) -> str:
    head = ("metric", "scen", "interval", "defense", "n", "mean", "sd", "err")
    lines = [head] + [(s.metric, str(s.scenario), f"{s.attack_interval:g}", s.defense_mode, str(s.n),
                       fmt(s.mean), fmt(s.sd), str(s.errors)) for s in summary]
    widths = [max(len(r[i]) for r in lines) for i in range(len(head))]
    return "".join("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip() + "\n" for r in lines)
