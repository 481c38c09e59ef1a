"""Named experiments: per-realization runners plus aggregate summaries.

A runner maps (L, p, params, rng) to a list of rows. Each row carries x, y
and optionally yerr, n (inner sample count) and experiment-specific columns.
The sweep adds L, p and the realization seed. A summarizer turns the full
table into the JSON summary block.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import ConfigError, ParameterError

LN2 = float(np.log(2.0))


@dataclass(frozen=True)
class Param:
    default: object
    kind: str  # int | float | bool | str | ints | floats
    lo: float | None = None
    hi: float | None = None
    choices: tuple | None = None
    help: str = ""
    nullable: bool = False

    def validate(self, name: str, v):
        if v is None:
            if self.nullable:
                return None
            raise ConfigError(f"params.{name} may not be null")
        if self.kind in ("ints", "floats"):
            if not isinstance(v, list) or not v:
                raise ConfigError(f"params.{name} must be a nonempty list")
            return [self._scalar(name, x, self.kind[:-1]) for x in v]
        return self._scalar(name, v, self.kind)

    def _scalar(self, name, v, kind):
        if kind == "bool":
            if not isinstance(v, bool):
                raise ConfigError(f"params.{name} must be true or false")
            return v
        if kind == "str":
            if not isinstance(v, str) or (self.choices and v not in self.choices):
                raise ConfigError(f"params.{name} must be one of {list(self.choices or [])}")
            return v
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"params.{name} must be a number, got {v!r}")
        if kind == "int":
            if not isinstance(v, int):
                raise ConfigError(f"params.{name} must be an integer")
        else:
            v = float(v)
            if not np.isfinite(v):
                raise ConfigError(f"params.{name} must be finite")
        if (self.lo is not None and v < self.lo) or (self.hi is not None and v > self.hi):
            raise ConfigError(f"params.{name} = {v} outside [{self.lo}, {self.hi}]")
        return v


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    run: Callable
    summarize: Callable
    L_default: tuple
    p_default: tuple
    p_range: tuple = (0.0, 1.0)
    p_label: str = "p"
    x_label: str = "x"
    y_label: str = "y"
    realizations: int = 10
    params: dict = field(default_factory=dict)
    columns: tuple = ()
    check: Callable | None = None  # (L, p, params) -> None, raises ConfigError
    deterministic: bool = False


REGISTRY: dict[str, Experiment] = {}


def register(exp: Experiment) -> Experiment:
    REGISTRY[exp.name] = exp
    return exp


def get(name: str) -> Experiment:
    if name not in REGISTRY:
        raise ConfigError(f"unknown experiment {name!r}; run `circuitlab list`")
    return REGISTRY[name]


def resolve_params(exp: Experiment, given: dict) -> dict:
    extra = sorted(set(given) - set(exp.params))
    if extra:
        raise ConfigError(f"unknown params for {exp.name}: {', '.join(extra)}")
    return {k: spec.validate(k, given.get(k, spec.default)) for k, spec in exp.params.items()}


# ---------------------------------------------------------------------------
# helpers


def _group(rows, *keys):
    out: dict = {}
    for r in rows:
        out.setdefault(tuple(r[k] for k in keys), []).append(r)
    return out


def _curves(rows, col="y"):
    """Mean and stderr of ``col`` per (L, p), as {L: (p array, mean, se)}."""
    from ..analysis import mean_stderr

    res = {}
    for (L,), rs in sorted(_group(rows, "L").items()):
        ps, m, e = [], [], []
        for (p,), cell in sorted(_group(rs, "p").items()):
            mu, se = mean_stderr([c[col] for c in cell])
            ps.append(p)
            m.append(float(mu))
            e.append(float(se))
        res[L] = (np.array(ps), np.array(m), np.array(e))
    return res


def _crossing(curves) -> dict:
    from ..analysis import crossing_finder

    sizes = sorted(curves)
    grids = [tuple(curves[L][0]) for L in sizes]
    if len(sizes) < 2 or any(g != grids[0] for g in grids):
        return {"error": "crossing needs at least two sizes on a common p grid"}
    try:
        c = crossing_finder(np.array(grids[0]), {L: curves[L][1] for L in sizes})
    except ParameterError as exc:
        return {"error": str(exc)}
    return {"estimate": c.estimate, "error": c.error,
            "pairs": {f"{a}-{b}": v for (a, b), v in sorted(c.pairs.items())}}


def _per_cell(rows, fn) -> list:
    out = []
    for (L, p), cell in sorted(_group(rows, "L", "p").items()):
        d = {"L": L, "p": p}
        d.update(fn(cell))
        out.append(d)
    return out


def _mean_y(cell, col="y"):
    y = np.array([c[col] for c in cell], dtype=np.float64)
    return {"mean": float(y.mean()), "stderr": float(y.std(ddof=1) / np.sqrt(y.size)) if y.size > 1 else 0.0,
            "n": int(y.size)}


def _need(cond, msg):
    if not cond:
        raise ConfigError(msg)


# ---------------------------------------------------------------------------
# statevector experiments


def _run_entanglement_growth(L, p, P, rng):
    from ..core.circuit import build_brickwork
    from ..statevector.state import apply_gate, entropy_value, init_product, measure

    depth = P["depth"] if P["depth"] is not None else 2 * L
    circ = build_brickwork(L, depth, P["boundary"], P["gates"], rng)
    state = init_product(L)
    half = range(L // 2)
    rows = []
    for tau, layer in enumerate(circ.layers, start=1):
        for ev in layer:
            apply_gate(state, ev.gate, ev.sites)
        if p > 0:
            for s in np.flatnonzero(rng.random(L) < p):
                measure(state, int(s), "Z", rng)
        rows.append({"x": tau, "y": entropy_value(state, half) / LN2})
    return rows


def _sum_entanglement_growth(rows, P):
    from ..analysis import linear_fit, mean_stderr

    out = []
    for (L, p), cell in sorted(_group(rows, "L", "p").items()):
        by_t = _group(cell, "x")
        t = np.array(sorted(k[0] for k in by_t), dtype=np.float64)
        m = np.array([mean_stderr([r["y"] for r in by_t[(tt,)]])[0] for tt in t])
        early = t <= max(2.0, L / 4)
        coef, err = linear_fit(t[early], m[early])
        out.append({"L": L, "p": p, "early_slope_bits_per_layer": float(coef[1]), "slope_err": float(err[1]),
                    "final_mean_bits": float(m[-1])})
    return {"cells": out}


def _check_sv(L, p, P):
    _need(2 <= L <= 20, "statevector experiments need 2 <= L <= 20")
    if P.get("boundary") == "periodic":
        _need(L % 2 == 0, "periodic brickwork needs even L")


register(Experiment(
    "entanglement-growth", "Half-chain entropy S_{L/2}(t) of monitored brickwork circuits (statevector).",
    _run_entanglement_growth, _sum_entanglement_growth, (12,), (0.0,), x_label="layer t",
    y_label="S_{L/2} (bits)", realizations=10, check=_check_sv,
    params={"depth": Param(None, "int", 1, None, help="layers (default 2L)", nullable=True),
            "boundary": Param("open", "str", choices=("open", "periodic")),
            "gates": Param("haar", "str", choices=("haar", "clifford", "u1"))}))


def _run_page(L, p, P, rng):
    from ..core.circuit import build_brickwork
    from ..statevector.state import init_product, purity, run_circuit

    vals = []
    for _ in range(P["batch"]):
        circ = build_brickwork(L, P["depth_factor"] * L, "open", "haar", rng)
        state, _ = run_circuit(init_product(L), circ, rng)
        vals.append(purity(state, range(L // 2)))
    vals = np.array(vals)
    se = float(vals.std(ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else 0.0
    return [{"x": L // 2, "y": float(vals.mean()), "yerr": se, "n": int(vals.size)}]


def _sum_page(rows, P):
    from ..statevector.state import haar_purity

    out = []
    for (L,), cell in sorted(_group(rows, "L").items()):
        w = np.array([r["n_samples"] for r in cell], dtype=np.float64)
        mp = float(np.sum(w * np.array([r["y"] for r in cell])) / w.sum())
        s2 = -np.log(mp)
        dA, dB = 2 ** (L // 2), 2 ** (L - L // 2)
        page = -np.log(haar_purity(dA, dB))
        catalan = (L // 2) * LN2 - LN2 if L % 2 == 0 else float("nan")
        out.append({"L": L, "mean_purity": mp, "annealed_S2_nats": float(s2), "lubkin_S2_nats": float(page),
                    "catalan_S2_nats": catalan, "rel_dev_catalan": float(abs(s2 - catalan) / catalan),
                    "samples": int(w.sum())})
    return {"sizes": out}


register(Experiment(
    "page-check", "Annealed half-chain second Renyi entropy of deep Haar brickwork vs the Page value.",
    _run_page, _sum_page, (10,), (0.0,), p_range=(0.0, 0.0), x_label="|A|", y_label="mean purity",
    realizations=100, check=lambda L, p, P: _need(2 <= L <= 20, "page-check needs 2 <= L <= 20"),
    params={"depth_factor": Param(4, "int", 1, None, help="depth in units of L"),
            "batch": Param(1, "int", 1, None, help="states averaged per realization")}))


def _run_sff(L, p, P, rng):
    from ..statevector.operators import cue_sampler, sff

    t_max = P["t_max"] if P["t_max"] is not None else 2 * L
    draw = cue_sampler(L)
    K = np.array([sff(draw(rng), t_max) for _ in range(P["batch"])])[:, 1:]
    n = K.shape[0]
    se = K.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros(t_max)
    return [{"x": t, "y": float(K[:, t - 1].mean()), "yerr": float(se[t - 1]), "n": n,
             "ratio": float(K[:, t - 1].mean() / t)} for t in range(1, t_max + 1)]


def _sum_sff(rows, P):
    out = []
    for (d,), cell in sorted(_group(rows, "L").items()):
        by_t = _group(cell, "x")
        ts = np.array(sorted(k[0] for k in by_t))
        w = {t: np.array([r["n_samples"] for r in by_t[(t,)]], dtype=np.float64) for t in ts}
        ratio = np.array([np.sum(w[t] * [r["y"] for r in by_t[(t,)]]) / w[t].sum() / t for t in ts])
        ramp = ts <= d
        out.append({"dimension": d, "samples": int(w[ts[0]].sum()),
                    "ramp_ratio_min": float(ratio[ramp].min()), "ramp_ratio_max": float(ratio[ramp].max()),
                    "ramp_ratio_mean": float(ratio[ramp].mean()),
                    "plateau_mean_over_d": float(ratio[~ramp].dot(ts[~ramp]) / max(1, (~ramp).sum()) / d)
                    if np.any(~ramp) else None})
    return {"dimensions": out}


register(Experiment(
    "sff-ramp", "Spectral form factor K(t) of circular-unitary matrices (L is the matrix dimension).",
    _run_sff, _sum_sff, (32,), (0.0,), p_range=(0.0, 0.0), x_label="t", y_label="K(t)", realizations=100,
    check=lambda L, p, P: _need(2 <= L <= 4096, "CUE dimension must lie in [2, 4096]"),
    params={"t_max": Param(None, "int", 1, None, help="largest t (default 2L)", nullable=True),
            "batch": Param(10, "int", 1, None, help="matrices per realization")}))


def _run_dual_unitary(L, p, P, rng):
    from ..core.circuit import build_brickwork
    from ..statevector.operators import two_point_value

    spec = {"kind": "dual-unitary", "J": P["J"]}
    circ = build_brickwork(L, P["t_max"], "open", spec, rng)
    ref = P["ref"] if P["ref"] is not None else L // 2 - 1
    rows = []
    for t in range(1, P["t_max"] + 1):
        for r in range(L):
            rows.append({"x": r - ref, "y": two_point_value(circ, r, t, ref), "t": t})
    return rows


def _sum_dual_unitary(rows, P):
    off = [abs(r["y"]) for r in rows if abs(r["x"]) != r["t"]]
    on = [abs(r["y"]) for r in rows if abs(r["x"]) == r["t"]]
    return {"max_abs_off_ray": float(max(off)) if off else 0.0, "max_abs_on_ray": float(max(on)) if on else 0.0,
            "rows": len(rows)}


def _check_du(L, p, P):
    _need(2 <= L <= 12, "dual-unitary correlations need 2 <= L <= 12")
    if P["ref"] is not None:
        _need(0 <= P["ref"] < L, "params.ref outside the chain")


register(Experiment(
    "dual-unitary-correlations", "Infinite-temperature Z-Z correlations G(x,t) in dual-unitary brickwork.",
    _run_dual_unitary, _sum_dual_unitary, (10,), (0.0,), p_range=(0.0, 0.0), x_label="x", y_label="G(x,t)",
    realizations=4, columns=("t",), check=_check_du,
    params={"t_max": Param(4, "int", 1, 16), "J": Param(None, "float", 0.0, np.pi / 4, nullable=True,
                                                      help="ZZ coupling (default random per gate)"),
            "ref": Param(None, "int", 0, None, nullable=True, help="reference site (default L/2 - 1)")}))


# ---------------------------------------------------------------------------
# stabilizer experiments


def _check_mipt(L, p, P):
    _need(L >= 4 and L % 4 == 0, "mipt-scan needs L divisible by 4")


def _run_mipt(L, p, P, rng):
    from ..stabilizer.dynamics import run_hybrid
    from ..stabilizer.tableau import tableau_init

    depth = int(round(P["depth_factor"] * L))
    res = run_hybrid(tableau_init(L, "all-up"), depth, p, rng, boundary=P["boundary"], checkpoints=[depth],
                     observables=("tmi", "half"))
    return [{"x": p, "y": float(res.series["tmi"][-1]), "s_half": float(res.series["half"][-1])}]


def _sum_mipt(rows, P):
    from ..analysis import collapse_quality, collapse_search

    curves = _curves(rows)
    out = {"crossing": _crossing(curves), "cells": _per_cell(rows, _mean_y)}
    sizes = sorted(curves)
    if len(sizes) >= 2 and all(tuple(curves[L][0]) == tuple(curves[sizes[0]][0]) for L in sizes):
        pg = curves[sizes[0]][0]
        ys = {L: curves[L][1] for L in sizes}
        es = {L: np.maximum(curves[L][2], 1e-3) for L in sizes}
        pcs = np.linspace(pg.min(), pg.max(), 57)
        nus = np.linspace(0.5, 3.0, 51)
        pc, nu, q = collapse_search(pg, ys, pcs, nus, errors=es)
        qs = np.array([collapse_quality(pg, ys, pc, n, errors=es) for n in nus])
        ok = nus[qs <= q + 1.0]
        out["collapse"] = {"p_c": pc, "nu": nu, "nu_err": float((ok.max() - ok.min()) / 2), "objective": q}
    return out


register(Experiment(
    "mipt-scan", "Tripartite mutual information of hybrid Clifford circuits across measurement rates.",
    _run_mipt, _sum_mipt, (64, 128, 256), tuple(float(v) for v in np.round(np.arange(0.10, 0.2401, 0.02), 2)),
    x_label="p", y_label="I3 (bits)", realizations=300, columns=("s_half",), check=_check_mipt,
    params={"depth_factor": Param(2.0, "float", 0.0625, None, help="depth in units of L"),
            "boundary": Param("periodic", "str", choices=("periodic", "open"))}))


def _run_purification(L, p, P, rng):
    from ..stabilizer.dynamics import purification_run

    depth = int(round(P["t_factor"] * L))
    res = purification_run(L, p, depth, rng, boundary=P["boundary"], checkpoints=[depth])
    S = float(res.series["purification"][-1])
    return [{"x": p, "y": S / L, "S": S}]


def _sum_purification(rows, P):
    lo, hi = P["pure_below"], P["mixed_above"]

    def cell(c):
        y = np.array([r["y"] for r in c])
        d = _mean_y(c)
        d.update({"frac_below": float(np.mean(y < lo)), "frac_above": float(np.mean(y > hi))})
        return d

    return {"thresholds": {"pure_below": lo, "mixed_above": hi}, "cells": _per_cell(rows, cell)}


def _check_even(L, p, P):
    _need(L >= 2, "need L >= 2")
    if P.get("boundary", "periodic") == "periodic":
        _need(L % 2 == 0, "periodic brickwork needs even L")


register(Experiment(
    "purification", "Residual entropy density of an initially maximally mixed chain under hybrid dynamics.",
    _run_purification, _sum_purification, (64,), (0.05, 0.40), x_label="p", y_label="S/L (bits per site)",
    realizations=200, columns=("S",), check=_check_even,
    params={"t_factor": Param(4.0, "float", 0.0625, None, help="evolution time in units of L"),
            "boundary": Param("periodic", "str", choices=("periodic", "open")),
            "pure_below": Param(0.01, "float", 0.0, 1.0), "mixed_above": Param(0.10, "float", 0.0, 1.0)}))


def _run_reference(L, p, P, rng):
    from ..stabilizer.dynamics import reference_qubit_run

    depth = int(round(P["depth_factor"] * L))
    res = reference_qubit_run(L, p, depth, rng, boundary=P["boundary"], checkpoints=[depth])
    return [{"x": p, "y": float(res.series["ancilla"][-1])}]


register(Experiment(
    "reference-qubit", "Entropy of a reference qubit entangled with a monitored chain.",
    _run_reference, lambda rows, P: {"cells": _per_cell(rows, _mean_y)}, (128,), (0.10, 0.30),
    x_label="p", y_label="S_ancilla (bits)", realizations=200, check=_check_even,
    params={"depth_factor": Param(2.0, "float", 0.0625, None, help="hybrid depth in units of L"),
            "boundary": Param("periodic", "str", choices=("periodic", "open"))}))


def _run_ising(L, p, P, rng):
    from ..stabilizer.dynamics import measurement_only_ising

    depth = int(round(P["depth_factor"] * L))
    res = measurement_only_ising(L, p, depth, rng, checkpoints=[depth])
    return [{"x": p, "y": res.chi_sg, "chi_L": res.chi_sg * L}]


def _sum_ising(rows, P):
    chiL = _curves(rows, "chi_L")
    alt = {L: (c[0], c[1] * L ** (-1.0 / 3.0), c[2] * L ** (-1.0 / 3.0)) for L, c in chiL.items()}
    return {"crossing_chi_L": _crossing(chiL), "crossing_chi_L23": _crossing(alt),
            "cells": _per_cell(rows, lambda c: _mean_y(c, "chi_L"))}


register(Experiment(
    "measurement-only-ising", "Spin-glass order chi^SG of measurement-only ZZ/X dynamics vs p_Z.",
    _run_ising, _sum_ising, (32, 64, 128), tuple(float(v) for v in np.round(np.arange(0.40, 0.6001, 0.02), 2)),
    p_label="p_Z", x_label="p_Z", y_label="chi^SG", realizations=200, columns=("chi_L",),
    check=lambda L, p, P: _need(L >= 2, "need L >= 2"),
    params={"depth_factor": Param(2.0, "float", 0.0625, None, help="time steps in units of L")}))


def _run_delta_s(L, p, P, rng):
    from ..stabilizer.dynamics import hybrid_state
    from ..stabilizer.tableau import delta_s_measurement

    depth = int(round(P["depth_factor"] * L))
    tab = hybrid_state(L, depth, p, rng, boundary="open")
    A = range(L // 2)
    xs = range(1, L // 2 + 1)
    return [{"x": x, "y": float(delta_s_measurement(tab, A, L // 2 - x))} for x in xs]


def _sum_delta_s(rows, P):
    from ..analysis import PowerLawFit, Series, mean_stderr, powerlaw_fit

    out = []
    for (L, p), cell in sorted(_group(rows, "L", "p").items()):
        by_x = _group(cell, "x")
        xs = np.array(sorted(k[0] for k in by_x), dtype=np.float64)
        ms = [mean_stderr([r["y"] for r in by_x[(x,)]]) for x in xs]
        m = np.array([a for a, _ in ms])
        e = np.array([b for _, b in ms])
        keep = (m > 0) & (xs >= P["fit_min"]) & (xs <= L / 4)
        d = {"L": L, "p": p}
        if keep.sum() >= 2:
            f: PowerLawFit = powerlaw_fit(Series(xs[keep], m[keep], e[keep]))
            d.update({"exponent": -f.exponent, "exponent_err": f.exponent_err})
        else:
            d["error"] = "too few positive points for a power-law fit"
        out.append(d)
    return {"cells": out}


register(Experiment(
    "delta-s-scan", "Entropy drop of a half chain from one Z measurement at distance x from its edge.",
    _run_delta_s, _sum_delta_s, (256,), (0.05,), x_label="x", y_label="dS (bits)", realizations=100,
    check=lambda L, p, P: _need(L >= 4 and L % 2 == 0, "delta-s-scan needs even L >= 4"),
    params={"depth_factor": Param(4.0, "float", 0.0625, None),
            "fit_min": Param(4, "int", 1, None, help="smallest x in the power-law fit")}))


# ---------------------------------------------------------------------------
# classical experiments


def _run_otoc(L, p, P, rng):
    from ..classical.strings import PauliString, string_markov_run

    o = L // 2
    run = string_markov_run(L, P["depth"], rng, PauliString.single(L, o), P["record_every"])
    rows = []
    idx = np.arange(L) - o
    for i, t in enumerate(run.times):
        inner = np.abs(idx) <= 0.3 * t
        rows.append({"x": int(t), "y": int(run.right[i] - o), "left": int(o - run.left[i]),
                     "interior": float(run.density[i, inner].mean())})
    return rows


def _sum_otoc(rows, P):
    from ..analysis import Series, linear_fit, powerlaw_fit

    lo, hi = P["window"]
    out = []
    for (L,), cell in sorted(_group(rows, "L").items()):
        by_t = _group(cell, "x")
        ts = np.array(sorted(k[0] for k in by_t), dtype=np.float64)
        R = np.array([[r["y"] for r in by_t[(t,)]] for t in ts], dtype=np.float64)
        n = R.shape[1]
        d = {"L": L, "samples": n}
        m = (ts >= lo) & (ts <= hi)
        if n >= 3 and m.sum() >= 2:
            coef, err = linear_fit(ts[m], R[m].mean(axis=1))
            w = R[m].std(axis=1, ddof=1)
            f = powerlaw_fit(Series(ts[m], w, w / np.sqrt(2 * (n - 1))))
            inner = np.array([r["interior"] for r in by_t[(ts[-1],)]])
            d.update({"v_B": float(coef[1]), "v_B_err": float(err[1]), "width_exponent": f.exponent,
                      "width_exponent_err": f.exponent_err, "interior_density": float(inner.mean()),
                      "interior_density_err": float(inner.std(ddof=1) / np.sqrt(n))})
        else:
            d["error"] = "need >= 3 realizations and >= 2 times in the fit window"
        out.append(d)
    return {"window": [lo, hi], "sizes": out}


def _check_otoc(L, p, P):
    _need(L >= 4, "otoc-front needs L >= 4")
    _need(P["depth"] % P["record_every"] == 0, "depth must be a multiple of record_every")
    _need(len(P["window"]) == 2 and P["window"][0] < P["window"][1], "params.window must be [lo, hi]")


register(Experiment(
    "otoc-front", "Right-endpoint front of Haar-averaged operator strings (exact Markov chain).",
    _run_otoc, _sum_otoc, (2200,), (0.0,), p_range=(0.0, 0.0), x_label="t", y_label="right endpoint",
    realizations=200, columns=("left", "interior"), check=_check_otoc,
    params={"depth": Param(1024, "int", 1, None), "record_every": Param(8, "int", 1, None),
            "window": Param([64, 1024], "floats", 0.0, None, help="fit window in t")}))


def _run_charge(L, p, P, rng):
    from ..classical.u1 import u1_amplitude_diffusion

    s = u1_amplitude_diffusion(L, P["t"], record=[P["t"]])
    return [{"x": int(x), "y": float(a)} for x, a in zip(s.x, s.profiles[0])]


def _sum_charge(rows, P):
    from ..analysis import gaussian_kernel_fit

    out = []
    for (L,), cell in sorted(_group(rows, "L").items()):
        first = [r for r in cell if r["seed"] == cell[0]["seed"]]
        x = np.array([r["x"] for r in first], dtype=np.float64)
        a = np.array([r["y"] for r in first])
        g = gaussian_kernel_fit(x, a, P["t"])
        out.append({"L": L, "t": P["t"], "D": g.D, "D_err": g.D_err, "center": g.center,
                    "variance": g.variance, "total": float(a.sum())})
    return {"sizes": out}


def _check_u1(L, p, P):
    _need(L >= 2, "need L >= 2")
    _need(L >= 2 * P["t"] + 4, "chain too short: need L >= 2t + 4")


register(Experiment(
    "charge-diffusion", "U(1) charge amplitude profile after t layers; Gaussian fit of the diffusion constant.",
    _run_charge, _sum_charge, (1001,), (0.0,), p_range=(0.0, 0.0), x_label="x", y_label="a_x(t)",
    realizations=1, check=_check_u1, deterministic=True,
    params={"t": Param(400, "int", 1, None)}))


def _run_weight(L, p, P, rng):
    from ..classical.u1 import u1_amplitude_diffusion, u1_conserved_weight

    s = u1_amplitude_diffusion(L, P["t"])
    w = u1_conserved_weight(s)
    return [{"x": int(t), "y": float(v), "scaled": float(v * 2 * np.sqrt(np.pi * t))} for t, v in zip(s.times, w)]


def _sum_weight(rows, P):
    out = []
    for (L,), cell in sorted(_group(rows, "L").items()):
        first = [r for r in cell if r["seed"] == cell[0]["seed"]]
        late = np.array([r["scaled"] for r in first if r["x"] >= P["t_min"]])
        ws = np.array([r["y"] for r in first])
        out.append({"L": L, "t_min": P["t_min"], "scaled_min": float(late.min()) if late.size else None,
                    "scaled_max": float(late.max()) if late.size else None,
                    "monotone": bool(np.all(np.diff(ws) <= 1e-15))})
    return {"sizes": out}


register(Experiment(
    "conserved-weight", "Conserved-charge weight w^c(t) = sum_x a_x^2 and its diffusive scaling.",
    _run_weight, _sum_weight, (1001,), (0.0,), p_range=(0.0, 0.0), x_label="t", y_label="w^c(t)",
    realizations=1, columns=("scaled",), check=_check_u1, deterministic=True,
    params={"t": Param(400, "int", 1, None), "t_min": Param(100, "int", 0, None)}))


def _run_tension(L, p, P, rng):
    from ..classical.mincut import poisson_cut_sample

    times = sorted(P["times"])
    T = times[-1]
    n = int(2 * T * P["rate"] * 1.05) + 8
    x0 = n // 2
    smp = poisson_cut_sample(n, times, rng, P["rate"], pin=x0)
    return [{"x": t, "y": float(smp.S[i, int(np.rint(x0 + p * t))] / t)} for i, t in enumerate(times)]


def _sum_tension(rows, P):
    from ..analysis import linear_fit, mean_stderr
    from ..classical.mincut import tension_extrapolate

    vs, Es, errs = [], [], []
    for (v,), cell in sorted(_group(rows, "p").items()):
        by_t = _group(cell, "x")
        ts = np.array(sorted(k[0] for k in by_t), dtype=np.float64)
        ms = np.array([mean_stderr([r["y"] for r in by_t[(t,)]]) for t in ts])
        E, err = tension_extrapolate(ts, ms[:, :1], ms[:, 1:])
        vs.append(v)
        Es.append(float(E[0]))
        errs.append(float(err[0]))
    vs, Es, errs = np.array(vs), np.array(Es), np.array(errs)
    out = {"v": vs.tolist(), "E": Es.tolist(), "E_err": errs.tolist()}
    m = np.abs(vs) <= P["fit_vmax"] + 1e-12
    if m.sum() >= 2 and len(set(np.abs(vs[m]))) >= 2:
        coef, cerr = linear_fit(vs[m] ** 2, Es[m], np.maximum(errs[m], 1e-9))
        out.update({"E0_fit": float(coef[0]), "E0_fit_err": float(cerr[0]),
                    "quadratic_coefficient": float(coef[1]), "quadratic_coefficient_err": float(cerr[1])})
    return out


register(Experiment(
    "min-cut-tension", "Line tension E(v) from point-to-point minimal cuts in Poisson circuits (p is v).",
    _run_tension, _sum_tension, (0,), tuple(float(v) for v in np.round(np.arange(-0.8, 0.8001, 0.2), 1)), p_range=(-1.0, 1.0),
    p_label="v", x_label="t", y_label="S/t (ln q)", realizations=100,
    params={"times": Param([128, 256, 512, 1024], "ints", 1, None), "rate": Param(1.0, "float", 1e-3, None),
            "fit_vmax": Param(0.8, "float", 0.0, 1.0)}))


def _run_dprm(L, p, P, rng):
    from ..classical.dprm import dprm_statistics

    heights = [h for h in P["heights"] if h <= L] if L else P["heights"]
    st = dprm_statistics(heights, 1, rng, P["law"])
    return [{"x": int(h), "y": float(st.energies[0, i]), "endpoint": int(st.positions[0, i])}
            for i, h in enumerate(st.heights)]


def _sum_dprm(rows, P):
    from ..analysis import Series, powerlaw_fit

    out = []
    for (L,), cell in sorted(_group(rows, "L").items()):
        by_h = _group(cell, "x")
        hs = np.array(sorted(k[0] for k in by_h), dtype=np.float64)
        E = np.array([[r["y"] for r in by_h[(h,)]] for h in hs])
        X = np.array([[r["endpoint"] for r in by_h[(h,)]] for h in hs], dtype=np.float64)
        n = E.shape[1]
        d = {"L": L, "samples": n}
        if n >= 3 and hs.size >= 2:
            rel = 1 / np.sqrt(2 * (n - 1))
            sE, sX = E.std(axis=1, ddof=1), X.std(axis=1, ddof=1)
            fb = powerlaw_fit(Series(hs, sE, sE * rel))
            fz = powerlaw_fit(Series(hs, sX, sX * rel))
            d.update({"beta": fb.exponent, "beta_err": fb.exponent_err, "zeta": fz.exponent,
                      "zeta_err": fz.exponent_err})
        else:
            d["error"] = "need >= 3 realizations and >= 2 heights"
        out.append(d)
    return {"sizes": out}


register(Experiment(
    "dprm-exponents", "Directed polymer ground states: energy and endpoint fluctuation exponents "
                      "(L caps the height; 0 means no cap).",
    _run_dprm, _sum_dprm, (0,), (0.0,), p_range=(0.0, 0.0), x_label="height", y_label="ground-state energy",
    realizations=1000, columns=("endpoint",),
    params={"heights": Param([256, 512, 1024, 2048, 4096], "ints", 2, None),
            "law": Param("uniform", "str", choices=("uniform", "exponential", "gaussian", "constant"))}))


def _run_membrane(L, p, P, rng):
    from ..classical.membrane import MembraneModel, finite_region_entropy, haar_tension, lightcone_tension, \
        membrane_entropy

    E = {"haar": haar_tension, "lightcone": lightcone_tension}[P["tension"]]
    model = MembraneModel(E, s_eq=P["s_eq"])
    ts = np.linspace(P["t_max"] / P["n_t"], P["t_max"], P["n_t"])
    rows = []
    for t in ts:
        s = membrane_entropy(model, P["S0"], 0.0, float(t), nv=P["nv"])
        row = {"x": float(t), "y": s}
        row["s_interval"] = finite_region_entropy(model, float(L), float(t), P["S0"], nv=P["nv"]) if L else 0.0
        rows.append(row)
    return rows


def _sum_membrane(rows, P):
    from ..analysis import linear_fit
    from ..classical.membrane import MembraneModel, haar_tension, lightcone_tension

    E = {"haar": haar_tension, "lightcone": lightcone_tension}[P["tension"]]
    model = MembraneModel(E, s_eq=P["s_eq"])
    out = []
    for (L,), cell in sorted(_group(rows, "L").items()):
        first = [r for r in cell if r["seed"] == cell[0]["seed"]]
        t = np.array([r["x"] for r in first])
        s = np.array([r["y"] for r in first])
        coef, _ = linear_fit(t, s)
        d = {"ell": L, "v_E_fit": float(coef[1] / P["s_eq"]), "v_E": model.v_E, "v_B": model.v_B}
        if L:
            si = np.array([r["s_interval"] for r in first])
            sat = np.flatnonzero(si >= P["s_eq"] * L * (1 - 1e-9))
            d["t_saturation"] = float(t[sat[0]]) if sat.size else None
            d["t_star_prediction"] = L / (2 * model.v_E) if model.v_E > 0 else None
        out.append(d)
    return {"regions": out}


register(Experiment(
    "membrane-solve", "Membrane minimization of half-line and interval entropies (L is the interval length).",
    _run_membrane, _sum_membrane, (20,), (0.0,), p_range=(0.0, 0.0), x_label="t", y_label="S (nats)",
    realizations=1, columns=("s_interval",), deterministic=True,
    check=lambda L, p, P: (_need(L >= 0, "interval length must be >= 0"), _need(P["nv"] % 2 == 1, "params.nv must be odd")),
    params={"tension": Param("haar", "str", choices=("haar", "lightcone")),
            "s_eq": Param(LN2, "float", 1e-12, None), "S0": Param(0.0, "float", 0.0, None),
            "t_max": Param(30.0, "float", 1e-6, None), "n_t": Param(30, "int", 1, None),
            "nv": Param(81, "int", 3, None)}))
