import csv
import dataclasses
import json

import numpy as np
import pytest

from circuitlab.cli import registry as R
from circuitlab.cli.config import parse_config
from circuitlab.cli.main import main
from circuitlab.cli.output import atomic_write, csv_bytes, json_bytes
from circuitlab.cli.sweep import THREADS_ENV, plan_sweep, realization_seed, resolve_threads, run_realization
from circuitlab.errors import ConfigError, NumericalDegeneracyError

TOY = {
    "entanglement-growth": "realizations: 2\ngrid: {L: [8], p: [0.0, 0.2]}\n",
    "page-check": "realizations: 3\ngrid: {L: [8]}\n",
    "sff-ramp": "realizations: 2\ngrid: {L: [8]}\n",
    "dual-unitary-correlations": "realizations: 1\ngrid: {L: [8]}\n",
    "mipt-scan": "realizations: 2\ngrid: {L: [16], p: [0.1, 0.3]}\n",
    "purification": "realizations: 2\ngrid: {L: [16]}\n",
    "reference-qubit": "realizations: 2\ngrid: {L: [16]}\n",
    "measurement-only-ising": "realizations: 2\ngrid: {L: [16, 32], p: [0.3, 0.7]}\n",
    "delta-s-scan": "realizations: 2\ngrid: {L: [32]}\n",
    "otoc-front": "realizations: 3\ngrid: {L: [300]}\nparams: {depth: 128, window: [16, 128]}\n",
    "charge-diffusion": "grid: {L: [301]}\nparams: {t: 100}\n",
    "conserved-weight": "grid: {L: [301]}\nparams: {t: 120}\n",
    "min-cut-tension": "realizations: 3\ngrid: {p: [-0.4, 0.0, 0.4]}\nparams: {times: [16, 32, 64]}\n",
    "dprm-exponents": "realizations: 12\nparams: {heights: [16, 32, 64]}\n",
    "membrane-solve": "params: {t_max: 10, n_t: 5}\n",
}


def _write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_bytes(text.encode())
    return str(p)


def test_every_registered_experiment_has_a_toy_run():
    assert set(TOY) == set(R.REGISTRY)


@pytest.mark.parametrize("name", sorted(TOY))
def test_toy_run_writes_outputs(name, tmp_path):
    cfg = _write(tmp_path, TOY[name] + "output: {svg: true}\n")
    out = tmp_path / "out"
    assert main([name, "--config", cfg, "--out", str(out), "--seed", "5"]) == 0
    rows = list(csv.DictReader((out / f"{name}.csv").open()))
    assert rows
    doc = json.loads((out / f"{name}.summary.json").read_text())
    assert doc["meta"]["experiment"] == name and doc["meta"]["rows"] == len(rows)
    assert "error" not in doc["summary"]
    assert (out / f"{name}.svg").read_text().startswith("<svg")


def test_sweep_grid_rows_and_thread_independence(tmp_path):
    cfg = _write(tmp_path, "seed: 99\nrealizations: 10\ngrid: {L: [8, 12, 16], p: [0.1, 0.2, 0.3]}\n")
    outs = []
    for threads in ("1", "3"):
        d = tmp_path / f"t{threads}"
        assert main(["mipt-scan", "--config", cfg, "--out", str(d), "--threads", threads]) == 0
        outs.append((d / "mipt-scan.csv").read_bytes())
    assert outs[0] == outs[1]
    rows = list(csv.DictReader(outs[0].decode().splitlines()))
    assert len(rows) == 90
    assert [(int(r["L"]), float(r["p"])) for r in rows[::10]] == [(L, p) for L in (8, 12, 16) for p in (0.1, 0.2, 0.3)]
    assert b"\r\n" not in outs[0]


def test_row_seed_replays_realization(tmp_path):
    cfg = _write(tmp_path, "seed: 7\nrealizations: 3\ngrid: {L: [16], p: [0.15]}\n")
    assert main(["mipt-scan", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader((tmp_path / "mipt-scan.csv").open()))
    assert int(rows[2]["seed"]) == realization_seed(7, 0, 2)
    plan = plan_sweep(parse_config(open(cfg, "rb").read(), "mipt-scan"))
    again = run_realization("mipt-scan", 16, 0.15, plan.params, int(rows[2]["seed"]))
    assert repr(float(again[0]["y"])) == rows[2]["y"]


@pytest.mark.parametrize("text", [
    "grid: {p: [1.5]}\n",
    "grid: {p: [0.1]}\nbogus: 1\n",
    "seed: 1\nseed: 2\n",
    "realizations: true\n",
    "params: {depth_factor: -1}\n",
    "grid: {L: [10]}\n",  # TMI quarters need L divisible by 4
    "experiment: page-check\n",
    "- not a mapping\n",
])
def test_config_errors_exit_2_and_write_nothing(text, tmp_path):
    cfg = _write(tmp_path, text)
    out = tmp_path / "out"
    assert main(["mipt-scan", "--config", cfg, "--out", str(out)]) == 2
    assert not out.exists()


def test_usage_errors_exit_2(tmp_path, capsys):
    assert main(["no-such-experiment", "--config", "x"]) == 2
    assert main(["mipt-scan"]) == 2
    assert main(["mipt-scan", "--config", str(tmp_path / "missing.yaml")]) == 2
    assert main(["mipt-scan", "--config", "x", "--seed", "-1"]) == 2


def test_degeneracy_exits_3_and_names_cell(tmp_path, monkeypatch, capsys):
    def boom(L, p, params, rng):
        raise NumericalDegeneracyError("lost normalization")

    monkeypatch.setitem(R.REGISTRY, "mipt-scan", dataclasses.replace(R.REGISTRY["mipt-scan"], run=boom))
    cfg = _write(tmp_path, "realizations: 2\ngrid: {L: [16], p: [0.1]}\n")
    assert main(["mipt-scan", "--config", cfg, "--out", str(tmp_path / "o")]) == 3
    err = capsys.readouterr().err
    assert "'L': 16" in err and "'p': 0.1" in err and "lost normalization" in err
    assert not (tmp_path / "o").exists()


def test_other_failures_exit_1(tmp_path, monkeypatch):
    def boom(L, p, params, rng):
        raise RuntimeError("unexpected")

    monkeypatch.setitem(R.REGISTRY, "mipt-scan", dataclasses.replace(R.REGISTRY["mipt-scan"], run=boom))
    cfg = _write(tmp_path, "realizations: 1\ngrid: {L: [16], p: [0.1]}\n")
    assert main(["mipt-scan", "--config", cfg, "--out", str(tmp_path / "o")]) == 1


def test_list(capsys):
    assert main(["list", "-v"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in R.REGISTRY)
    assert "params.depth_factor" in out


def test_thread_precedence(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert resolve_threads(None) == 1
    monkeypatch.setenv(THREADS_ENV, "4")
    assert resolve_threads(None) == 4
    assert resolve_threads(2) == 2
    monkeypatch.setenv(THREADS_ENV, "many")
    with pytest.raises(ConfigError):
        resolve_threads(None)


def test_config_hash_is_of_raw_bytes():
    import hashlib

    raw = b"seed: 3\n# comment\n"
    assert parse_config(raw, "mipt-scan").config_hash == hashlib.sha256(raw).hexdigest()


def test_output_formatting(tmp_path):
    data = csv_bytes(("a", "b"), [{"a": 0.1, "b": 3}, {"a": float("nan"), "b": -1}])
    assert data == b"a,b\n0.1,3\nnan,-1\n"
    assert json.loads(json_bytes({"z": float("nan"), "a": np.float64(1.5)})) == {"a": 1.5, "z": None}
    target = tmp_path / "f.txt"
    atomic_write(target, b"one")
    atomic_write(target, b"two")
    assert target.read_bytes() == b"two"
    assert [p.name for p in tmp_path.iterdir()] == ["f.txt"]
