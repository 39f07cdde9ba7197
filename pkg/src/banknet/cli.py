"""
Command-line front end.

::

    banknet bis-analyze --input DIR --out DIR [--format csv|json] ...
    banknet aml-scan --input FILE --out DIR [--seed S] ...
    banknet oracle-check [--iterations N] [--seed S]

Every option can also come from a TOML file given with ``--config``.  Keys
are the long option names with dashes or underscores (``damping = 0.9``,
``amount_threshold = 5000``); a table named after the subcommand overrides
top-level keys.  Command-line flags override the file.

Exit codes: 0 success, 1 oracle mismatch, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .aml import AmlConfig, run_aml_pipeline
from .centrality import (
    REPORT_FIELDS,
    ConConfig,
    LeaderThresholds,
    PageRankConfig,
    analyze_series,
    epsilon_timeseries,
    leader_events,
)
from .community import LouvainConfig
from .errors import BanknetError
from .ingest import load_snapshot_series, parse_transactions
from .oracles import run_oracle_suites

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("banknet")

EXIT_OK, EXIT_ORACLE, EXIT_INPUT = 0, 1, 2

DEFAULTS = {
    "format": "csv",
    "threads": 1,
    "damping": 0.85,
    "pr_tolerance": 1e-10,
    "pr_max_iter": 200,
    "con_combiner": "min",
    "lkl_c": 0.1,
    "lkl_C": -0.4,
    "t0": 1.0,
    "amount_threshold": 10_000.0,
    "min_cycle": 3,
    "max_cycle": 8,
    "path_min": 4,
    "path_max": 7,
    "min_community": 3,
    "seed": 0,
    "resolution": 1.0,
    "header": False,
    "iterations": 100,
}


@dataclass
class RunConfig:
    command: str
    input: Path | None = None
    out: Path | None = None
    fmt: str = "csv"
    threads: int = 1
    header: bool = False
    iterations: int = 100
    seed: int = 0
    inject_fault: bool = False
    con: ConConfig = field(default_factory=ConConfig)
    pagerank: PageRankConfig = field(default_factory=PageRankConfig)
    thresholds: LeaderThresholds = field(default_factory=LeaderThresholds)
    louvain: LouvainConfig = field(default_factory=LouvainConfig)
    aml: AmlConfig = field(default_factory=AmlConfig)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="banknet", description=__doc__.split("\n\n")[0].strip())
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", type=Path, help="TOML file with option defaults")
        sp.add_argument("--threads", type=int, help="worker processes (results do not depend on it)")

    b = sub.add_parser("bis-analyze", help="centralities and leaders for a directory of BIS tables")
    common(b)
    b.add_argument("--input", type=Path)
    b.add_argument("--out", type=Path)
    b.add_argument("--format", choices=["csv", "json"])
    b.add_argument("--damping", type=float)
    b.add_argument("--pr-tolerance", type=float)
    b.add_argument("--pr-max-iter", type=int)
    b.add_argument("--con-combiner", choices=["min", "product", "sum"])
    b.add_argument("--lkl-c", type=float, help="low-key threshold c")
    b.add_argument("--lkl-C", dest="lkl_C", type=float, help="highly-exposed threshold C")

    a = sub.add_parser("aml-scan", help="screen a transaction list for sub-threshold cycles")
    common(a)
    a.add_argument("--input", type=Path)
    a.add_argument("--out", type=Path)
    a.add_argument("--header", action="store_true", default=None, help="first line is a header")
    a.add_argument("--t0", type=float, help="period threshold in years")
    a.add_argument("--amount-threshold", type=float)
    a.add_argument("--min-cycle", type=int)
    a.add_argument("--max-cycle", type=int)
    a.add_argument("--path-min", type=int)
    a.add_argument("--path-max", type=int)
    a.add_argument("--min-community", type=int, help="smallest community order kept")
    a.add_argument("--resolution", type=float)
    a.add_argument("--seed", type=int)

    o = sub.add_parser("oracle-check", help="cross-check fast routines against brute force")
    common(o)
    o.add_argument("--iterations", type=int)
    o.add_argument("--seed", type=int)
    o.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return p


def _load_config(path: Path | None, command: str) -> dict:
    if path is None:
        return {}
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    flat = {k: v for k, v in raw.items() if not isinstance(v, dict)}
    flat.update(raw.get(command, {}))
    out = {}
    for k, v in flat.items():
        key = k.replace("-", "_")
        if key not in DEFAULTS:
            raise BanknetError(f"unknown config key {k!r} in {path}")
        out[key] = v
    return out


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, config file and flags into a validated :class:`RunConfig`."""
    opts = dict(DEFAULTS)
    opts.update(_load_config(getattr(args, "config", None), args.command))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    cfg = RunConfig(
        command=args.command,
        input=getattr(args, "input", None),
        out=getattr(args, "out", None),
        fmt=opts["format"],
        threads=int(opts["threads"]),
        header=bool(opts["header"]),
        iterations=int(opts["iterations"]),
        seed=int(opts["seed"]),
        inject_fault=bool(getattr(args, "inject_fault", False)),
        con=ConConfig(opts["con_combiner"]),
        pagerank=PageRankConfig(float(opts["damping"]), float(opts["pr_tolerance"]), int(opts["pr_max_iter"])),
        thresholds=LeaderThresholds(float(opts["lkl_c"]), float(opts["lkl_C"])),
        louvain=LouvainConfig(resolution=float(opts["resolution"]), seed=int(opts["seed"])),
        aml=AmlConfig(
            t0=float(opts["t0"]),
            amount_threshold=float(opts["amount_threshold"]),
            min_cycle_len=int(opts["min_cycle"]),
            max_cycle_len=int(opts["max_cycle"]),
            path_len_min=int(opts["path_min"]),
            path_len_max=int(opts["path_max"]),
            min_community_order=int(opts["min_community"]),
        ),
    )
    if cfg.threads < 1:
        raise BanknetError("--threads must be >= 1")
    if cfg.fmt not in ("csv", "json"):
        raise BanknetError(f"unknown format {cfg.fmt!r}")
    if cfg.command in ("bis-analyze", "aml-scan"):
        if cfg.input is None or cfg.out is None:
            raise BanknetError(f"{cfg.command} needs --input and --out")
        if cfg.command == "bis-analyze" and not cfg.input.is_dir():
            raise BanknetError(f"input directory {cfg.input} does not exist")
        if cfg.command == "aml-scan" and not cfg.input.is_file():
            raise BanknetError(f"input file {cfg.input} does not exist")
    if cfg.iterations < 0:
        raise BanknetError("--iterations must be >= 0")
    return cfg


def _safe_name(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", label).strip("_") or "unnamed"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _table(rows: list[dict], fields, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def cmd_bis_analyze(cfg: RunConfig) -> int:
    series = load_snapshot_series(cfg.input, workers=cfg.threads)
    reports = analyze_series(series, cfg.con, cfg.pagerank, cfg.thresholds, workers=cfg.threads)
    ext = cfg.fmt
    for rep in reports:
        text = rep.to_json() if cfg.fmt == "json" else rep.to_csv()
        _write(cfg.out / "reports" / f"{_safe_name(rep.period)}.{ext}", text)
    used = set()
    for country, rows in epsilon_timeseries(reports).items():
        name = _safe_name(country)
        while name in used:
            name += "_"
        used.add(name)
        _write(cfg.out / "timeseries" / f"{name}.{ext}", _table(rows, REPORT_FIELDS, cfg.fmt))
    events = [
        {"period": p, "country": c, "class": cls.value, "epsilon": e}
        for p, c, cls, e in leader_events(reports)
    ]
    _write(cfg.out / f"leaders.{ext}", _table(events, ("period", "country", "class", "epsilon"), cfg.fmt))
    log.info("analysed %d snapshots, %d leader events", len(reports), len(events))
    return EXIT_OK


def cmd_aml_scan(cfg: RunConfig) -> int:
    with open(cfg.input, encoding="utf-8", newline="") as fh:
        edges = parse_transactions(fh, header=cfg.header, source=str(cfg.input))
    report = run_aml_pipeline(edges, cfg.louvain, cfg.aml, workers=cfg.threads)
    _write(cfg.out / "aml_report.json", report.to_json())
    _write(cfg.out / "flagged_accounts.csv", report.flagged_csv())
    _write(cfg.out / "r_values.csv", report.r_values_csv())
    _write(cfg.out / "partition.csv", report.partition.to_csv(report.labels))
    s = report.summary
    log.info("%d cycles in %d communities, %d flagged accounts", s["n_cycles"], s["n_cycle_communities"], s["n_cycle_nodes"])
    return EXIT_OK


def cmd_oracle_check(cfg: RunConfig) -> int:
    failures = run_oracle_suites(cfg.iterations, cfg.seed, cfg.inject_fault)
    for f in failures:
        print(f"FAIL suite={f.suite} seed={f.seed}: {f.detail}")
    if failures:
        return EXIT_ORACLE
    print(f"oracle-check: all suites passed ({cfg.iterations} instances each, base seed {cfg.seed})")
    return EXIT_OK


COMMANDS = {
    "bis-analyze": cmd_bis_analyze,
    "aml-scan": cmd_aml_scan,
    "oracle-check": cmd_oracle_check,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = build_run_config(args)
        return COMMANDS[cfg.command](cfg)
    except (BanknetError, ValueError, OSError) as exc:
        print(f"banknet {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
