"""Command-line entry point: ``run``, ``matrix`` and ``report``."""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

from .errors import DshRplError
from .matrix import (DEFAULT_MATRIX, fmt, rows_from_dir, run_matrix, summarize, summary_csv,
                     summary_table)
from .sim.config import ScenarioConfig, dump_config, load_config
from .sim.scenario import run_scenario


# the printed accuracy-style formula is not a miss rate; report what is computed
TABLE_NOTE = ("# dr = 100*TP/(TP+FN), fpr = 100*FP/(FP+TN), fnr = 100*FN/(FN+TP), "
              "pdr = 100*delivered/sent\n")


def _cmd_run(args) -> int:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    changes = {"keep_records": True}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.defense is not None:
        changes["defense"] = args.defense == "on"
    cfg = cfg.replace(**changes).validate()
    res = run_scenario(cfg)
    row = res.metrics_row(0)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    res.trace.write(out / "trace.tsv")
    res.graph.write_edge_list(out / "dodag.txt")
    (out / "config.txt").write_text(dump_config(cfg), encoding="utf-8")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("seed", "defense_mode", "tp", "tn", "fp", "fn", "dr", "fpr", "fnr", "pdr", "digest"))
    c = res.counts
    w.writerow((cfg.seed, row.defense_mode, c.tp, c.tn, c.fp, c.fn,
                fmt(row.dr), fmt(row.fpr), fmt(row.fnr), fmt(row.pdr), f"{res.digest:016x}"))
    (out / "metrics.csv").write_text(buf.getvalue(), encoding="utf-8", newline="")
    with open(out / "quarantine.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("time\tmalicious\treattached\tunattached\n")
        for q in res.quarantines:
            fh.write(f"{q.time}\t{q.malicious}\t{len(q.reattached)}\t{len(q.unattached)}\n")
    print(f"seed={cfg.seed} defense={row.defense_mode} attackers={list(res.attackers)} "
          f"quarantined={list(res.quarantined)}")
    print(f"dr={fmt(row.dr)} fpr={fmt(row.fpr)} fnr={fmt(row.fnr)} pdr={fmt(row.pdr)} "
          f"digest={res.digest:016x}")
    if res.unprobed_attackers:
        print(f"attackers never probed: {list(res.unprobed_attackers)}")
    return 0


def _cmd_matrix(args) -> int:
    path = args.matrix
    if path is None:
        path = Path(args.out) / "matrix.ini"
        Path(args.out).mkdir(parents=True, exist_ok=True)
        path.write_text(DEFAULT_MATRIX, encoding="utf-8")
    rows, paths = run_matrix(path, args.out, reps=args.reps, jobs=args.jobs)
    failed = [r for r in rows if r.error]
    print(f"{len(rows)} runs, {len(failed)} failed; wrote {', '.join(str(p) for p in paths.values())}")
    return 1 if failed else 0


def _cmd_report(args) -> int:
    src = Path(args.inp)
    rows = rows_from_dir(src if src.is_dir() else src.parent)
    summary = summarize(rows)
    if args.format == "csv":
        sys.stdout.write(summary_csv(summary))
    else:
        sys.stdout.write(TABLE_NOTE + summary_table(summary))
    return 1 if any(r.error for r in rows) else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dshrpl", description="Sinkhole-resistant DODAG simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one scenario")
    r.add_argument("--config", help="key = value scenario file (defaults if omitted)")
    r.add_argument("--seed", type=int)
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--defense", choices=("on", "off"))
    r.set_defaults(func=_cmd_run)

    m = sub.add_parser("matrix", help="run a scenario matrix")
    m.add_argument("--matrix", help="INI matrix file (built-in four-scenario matrix if omitted)")
    m.add_argument("--out", required=True)
    m.add_argument("--reps", type=int)
    m.add_argument("--jobs", type=int, default=1)
    m.set_defaults(func=_cmd_matrix)

    rep = sub.add_parser("report", help="summarise matrix CSVs")
    rep.add_argument("--in", dest="inp", required=True, help="matrix output directory")
    rep.add_argument("--format", choices=("csv", "table"), default="table")
    rep.set_defaults(func=_cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (DshRplError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
