"""Grid sweeps with deterministic, parallelism-independent output."""
from __future__ import annotations

import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..core.rng import derive_seed
from ..errors import CapExceededError, ConfigError, NumericalDegeneracyError, ParameterError
from . import registry as R

BASE_COLUMNS = ("x", "y", "yerr", "n_samples", "L", "p", "seed")
THREADS_ENV = "CIRCUITLAB_THREADS"


@dataclass
class SweepPlan:
    experiment: str
    L: list
    p: list
    realizations: int
    params: dict
    seed: int

    @property
    def cells(self) -> list[tuple[int, int, float]]:
        """(cell index, L, p) in grid order: L outer, p inner."""
        return [(i * len(self.p) + j, L, p) for i, L in enumerate(self.L) for j, p in enumerate(self.p)]


@dataclass
class ResultTable:
    columns: tuple
    rows: list
    meta: dict = field(default_factory=dict)


class CellFailure(Exception):
    def __init__(self, kind: str, cell: dict, message: str):
        super().__init__(f"{kind} in cell {cell}: {message}")
        self.kind = kind
        self.cell = cell


def _axis(v, what, cast):
    vals = v if isinstance(v, list) else [v]
    if not vals:
        raise ConfigError(f"grid.{what} is empty")
    out = []
    for x in vals:
        if isinstance(x, bool) or not isinstance(x, (int, float)) or (cast is int and not isinstance(x, int)):
            raise ConfigError(f"grid.{what} entries must be {'integers' if cast is int else 'numbers'}, got {x!r}")
        out.append(cast(x))
    if len(set(out)) != len(out):
        raise ConfigError(f"grid.{what} has duplicates")
    return out


def plan_sweep(cfg, seed_override: int | None = None) -> SweepPlan:
    """Validate every parameter before any computation."""
    exp = R.get(cfg.experiment)
    params = R.resolve_params(exp, cfg.params)
    Ls = _axis(cfg.grid.get("L", list(exp.L_default)), "L", int)
    ps = _axis(cfg.grid.get("p", list(exp.p_default)), "p", float)
    lo, hi = exp.p_range
    for p in ps:
        if not (np.isfinite(p) and lo <= p <= hi):
            raise ConfigError(f"{exp.p_label} = {p} outside [{lo}, {hi}]")
    for L in Ls:
        if L < 0:
            raise ConfigError(f"L = {L} must be nonnegative")
        for p in ps:
            if exp.check is not None:
                exp.check(L, p, params)
    reps = cfg.realizations if cfg.realizations is not None else exp.realizations
    seed = cfg.seed if seed_override is None else seed_override
    return SweepPlan(exp.name, Ls, ps, int(reps), params, int(seed))


def realization_seed(master: int, cell: int, realization: int) -> int:
    return derive_seed(master, cell, realization)


def run_realization(experiment: str, L: int, p: float, params: dict, seed: int) -> list[dict]:
    """One realization from its seed alone; a CSV row's seed replays it."""
    exp = R.get(experiment)
    rows = exp.run(L, p, params, np.random.default_rng(seed))
    out = []
    for r in rows:
        row = {"x": r["x"], "y": r["y"], "yerr": r.get("yerr", 0.0), "n_samples": r.get("n", 1),
               "L": L, "p": p, "seed": seed}
        for c in exp.columns:
            row[c] = r[c]
        out.append(row)
    return out


def _task(args):
    experiment, cell, L, p, k, params, seed = args
    try:
        return "ok", run_realization(experiment, L, p, params, seed)
    except NumericalDegeneracyError as exc:
        kind, msg = "degenerate", str(exc)
    except (ParameterError, CapExceededError, ConfigError) as exc:
        kind, msg = "parameter", str(exc)
    except Exception:  # noqa: BLE001 - reported with the failing cell
        kind, msg = "error", traceback.format_exc()
    return kind, {"cell": cell, "L": L, "p": p, "realization": k, "seed": seed, "message": msg}


def resolve_threads(cli_threads: int | None) -> int:
    """--threads wins; otherwise the environment variable; otherwise 1."""
    if cli_threads is not None:
        n = cli_threads
    else:
        env = os.environ.get(THREADS_ENV, "").strip()
        if not env:
            return 1
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from exc
    if n < 1:
        raise ConfigError("thread count must be >= 1")
    return n


def sweep(plan: SweepPlan, threads: int = 1) -> ResultTable:
    """Run every (cell, realization); rows come back in grid order whatever
    the worker count."""
    exp = R.get(plan.experiment)
    tasks = [(plan.experiment, c, L, p, k, plan.params, realization_seed(plan.seed, c, k))
             for c, L, p in plan.cells for k in range(plan.realizations)]
    if threads <= 1 or len(tasks) <= 1:
        results = map(_task, tasks)
        results = list(results)
    else:
        chunk = max(1, len(tasks) // (threads * 8))
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_task, tasks, chunksize=chunk))
    rows = []
    for status, payload in results:
        if status != "ok":
            raise CellFailure(status, {k: payload[k] for k in ("L", "p", "realization", "seed")},
                              payload["message"])
        rows.extend(payload)
    return ResultTable(BASE_COLUMNS + tuple(exp.columns), rows)
