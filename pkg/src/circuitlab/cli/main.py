"""circuitlab command-line driver.

    circuitlab <experiment> --config <path> [--out <dir>] [--seed <u64>] [--threads <n>]
    circuitlab list [-v]

Exit codes: 0 success, 2 configuration error (nothing written), 3 numerical
degeneracy in an engine, 1 any other failure.
"""
from __future__ import annotations

import argparse
import subprocess
import sys
import time
from pathlib import Path

from ..errors import CapExceededError, ConfigError, ParameterError
from . import registry as R
from .config import U64, load_config
from .output import atomic_write, csv_bytes, json_bytes
from .svg import table_plot
from .sweep import CellFailure, plan_sweep, resolve_threads, sweep

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DEGENERATE = 0, 1, 2, 3


def version_string() -> str:
    from importlib.metadata import PackageNotFoundError, version

    try:
        v = version("artifact")
    except PackageNotFoundError:
        v = "0+unknown"
    try:
        rev = subprocess.run(["git", "describe", "--always", "--dirty"], cwd=Path(__file__).parent,
                             capture_output=True, text=True, timeout=5)
        if rev.returncode == 0 and rev.stdout.strip():
            v += f"+g{rev.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return v


def _u64(s: str) -> int:
    try:
        v = int(s, 0)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from exc
    if not 0 <= v < U64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return v


def _positive(s: str) -> int:
    try:
        v = int(s)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from exc
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def cmd_list(verbose: bool) -> int:
    width = max(len(n) for n in R.REGISTRY)
    for name, exp in sorted(R.REGISTRY.items()):
        print(f"{name:<{width}}  {exp.description}")
        if verbose:
            print(f"{'':<{width}}    grid: L={list(exp.L_default)} {exp.p_label}={list(exp.p_default)}; "
                  f"realizations={exp.realizations}")
            for k, spec in exp.params.items():
                extra = f" ({spec.help})" if spec.help else ""
                print(f"{'':<{width}}    params.{k}: {spec.kind} = {spec.default!r}{extra}")
    return EXIT_OK


def run_experiment(name: str, config: str, out: str | None, seed: int | None, threads: int | None) -> int:
    try:
        cfg = load_config(config, name)
        R.get(name)
        plan = plan_sweep(cfg, seed)
        nthreads = resolve_threads(threads)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    exp = R.get(name)
    out_dir = Path(out) if out is not None else (cfg.out_dir or Path("."))
    stem = cfg.name or name
    t0 = time.perf_counter()
    try:
        table = sweep(plan, nthreads)
    except CellFailure as exc:
        print(f"{name}: {exc}", file=sys.stderr)
        return {"degenerate": EXIT_DEGENERATE, "parameter": EXIT_CONFIG}.get(exc.kind, EXIT_FAIL)
    except CapExceededError as exc:
        print(f"{name}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    wall = time.perf_counter() - t0
    try:
        summary = exp.summarize(table.rows, plan.params)
    except (ParameterError, ValueError, ArithmeticError) as exc:
        summary = {"error": f"summary failed: {exc}"}
    meta = {"experiment": name, "config_hash": cfg.config_hash, "seed": plan.seed, "version": version_string(),
            "wall_time_s": round(wall, 3), "threads": nthreads, "grid": {"L": plan.L, exp.p_label: plan.p},
            "realizations": plan.realizations, "params": plan.params, "columns": list(table.columns),
            "rows": len(table.rows), "csv": f"{stem}.csv"}
    atomic_write(out_dir / f"{stem}.csv", csv_bytes(table.columns, table.rows))
    atomic_write(out_dir / f"{stem}.summary.json", json_bytes({"meta": meta, "summary": summary}))
    if cfg.svg:
        atomic_write(out_dir / f"{stem}.svg", table_plot(table.rows, exp.x_label, exp.y_label, name, exp.p_label))
    print(f"{name}: {len(table.rows)} rows -> {out_dir / (stem + '.csv')} ({wall:.1f} s)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="circuitlab", description="Random and monitored quantum circuit experiments.")
    ap.add_argument("experiment", help="experiment name, or 'list'")
    ap.add_argument("--config", help="YAML experiment config")
    ap.add_argument("--out", help="output directory (overrides output.dir)")
    ap.add_argument("--seed", type=_u64, help="master seed (overrides the config)")
    ap.add_argument("--threads", type=_positive, help="worker processes (default $CIRCUITLAB_THREADS or 1)")
    ap.add_argument("-v", "--verbose", action="store_true", help="with 'list': show grids and params")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.experiment == "list":
        return cmd_list(args.verbose)
    if args.experiment not in R.REGISTRY:
        print(f"config error: unknown experiment {args.experiment!r}; run `circuitlab list`", file=sys.stderr)
        return EXIT_CONFIG
    if not args.config:
        print("config error: --config is required", file=sys.stderr)
        return EXIT_CONFIG
    return run_experiment(args.experiment, args.config, args.out, args.seed, args.threads)


if __name__ == "__main__":
    sys.exit(main())
