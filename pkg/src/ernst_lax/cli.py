"""``ernst-lax`` command line: load a config, run suites, write the report."""

from __future__ import annotations

import argparse
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import RunConfig, load_config, parse_complex, scaled, validate
from .errors import ConfigError, ErnstLaxError
from .report import VerificationReport, emit_report, write_tower_csv
from .suites import SUITES, Context

SUBCOMMANDS = list(SUITES) + ["all"]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ernst-lax", description=__doc__)
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", type=Path, help="JSON run configuration (defaults are built in)")
    p.add_argument("--out", type=Path, help="output directory for report.json and CSV tables")
    p.add_argument("--grid-scale", type=int, default=1, help="multiply every grid's cell count by k")
    p.add_argument("--seed", help="seed characteristic for the charge tower")
    p.add_argument("--lambda", dest="lam", help="single spectral parameter, e.g. 0.5+0.5j")
    p.add_argument("--quiet", action="store_true", help="print only the summary line")
    return p


def apply_overrides(cfg: RunConfig, grid_scale: int = 1, seed=None, lam=None) -> RunConfig:
    if grid_scale < 1:
        raise ConfigError("--grid-scale must be a positive integer", "grid-scale")
    if grid_scale != 1:
        cfg.solution.grid = scaled(cfg.solution.grid, grid_scale)
        cfg.sweep.solution.grid = scaled(cfg.sweep.solution.grid, grid_scale)
        for s in cfg.catalog:
            s.grid = scaled(s.grid, grid_scale)
    if seed is not None:
        cfg.seed = seed
    if lam is not None:
        cfg.lambdas = [str(parse_complex(lam, "lambda"))]
    return validate(cfg)


def versions() -> dict:
    return {
        "ernst_lax": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def run(subcommand: str, cfg: RunConfig) -> tuple[VerificationReport, Context]:
    names = list(SUITES) if subcommand == "all" else [subcommand]
    ctx = Context(cfg)
    report = VerificationReport(meta={"config": cfg.as_dict(), "versions": versions(), "subcommand": subcommand})
    timing = {}
    start = time.perf_counter()
    for name in names:
        t0 = time.perf_counter()
        part = SUITES[name](ctx)
        timing[name] = time.perf_counter() - t0
        for check in part.checks:
            report.add(check)
        report.tables.update(part.tables)
    timing["total"] = time.perf_counter() - start
    report.meta["timing"] = timing
    return report, ctx


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = apply_overrides(cfg, args.grid_scale, args.seed, args.lam)
    except ConfigError as exc:
        print(f"ernst-lax: config error: {exc}", file=sys.stderr)
        return 2

    try:
        report, ctx = run(args.subcommand, cfg)
    except ErnstLaxError as exc:
        print(f"ernst-lax: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

    out = args.out if args.out is not None else Path(cfg.output.dir)
    formats = ("json", "csv") if cfg.output.csv else ("json",)
    try:
        emit_report(report, out, formats)
        if cfg.output.tower_csv and args.subcommand in ("tower", "all"):
            for gr in ctx.grids(cfg.solution):
                write_tower_csv(ctx.main_tower(gr), out / f"tower_{gr.n_rho}x{gr.n_z}.csv")
    except OSError as exc:
        print(f"ernst-lax: {exc}", file=sys.stderr)
        return 2

    if not args.quiet:
        for c in report.checks:
            order = f" order={c.order:.3f}" if c.order is not None else ""
            print(f"{'PASS' if c.passed else 'FAIL'} {c.name}{order}")
    failed = sum(not c.passed for c in report.checks)
    print(f"{len(report.checks) - failed}/{len(report.checks)} checks passed; report in {out / 'report.json'}")
    return 0 if failed == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
