"""Experiment configuration files.

A config is a single YAML document holding one mapping. Recognised keys:

    experiment: mipt-scan        # optional; must match the command-line name
    seed: 12345                  # master seed, integer in [0, 2^64)
    realizations: 300            # per grid cell, >= 1
    grid:                        # sweep axes; either may be a scalar or a list
      L: [64, 128, 256]
      p: [0.10, 0.15, 0.20]
    params:                      # experiment-specific, see `circuitlab list -v`
      depth_factor: 2
    output:
      dir: results               # overridden by --out
      name: mipt                 # file stem, default the experiment name
      svg: true

Any other key, at any level, is an error. Duplicate keys are an error.
Booleans are not accepted where numbers are expected. The SHA-256 of the raw
file bytes is recorded in every output as the config hash.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..errors import ConfigError

TOP_KEYS = {"experiment", "seed", "realizations", "grid", "params", "output"}
OUTPUT_KEYS = {"dir", "name", "svg"}
GRID_KEYS = {"L", "p"}
U64 = 1 << 64


class _StrictLoader(yaml.SafeLoader):
    pass


def _no_duplicates(loader, node, deep=False):
    seen = set()
    for k, _ in node.value:
        key = loader.construct_object(k, deep=deep)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} (line {k.start_mark.line + 1})")
        seen.add(key)
    return loader.construct_mapping(node, deep)


_StrictLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _no_duplicates)


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    realizations: int | None
    grid: dict
    params: dict
    out_dir: Path | None
    name: str | None
    svg: bool
    config_hash: str
    raw: dict = field(default_factory=dict)


def _int(v, what, lo=None, hi=None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{what} must be an integer, got {v!r}")
    if (lo is not None and v < lo) or (hi is not None and v >= hi):
        raise ConfigError(f"{what} = {v} out of range")
    return v


def _keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a mapping")
    extra = sorted(set(map(str, d)) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def parse_config(text: bytes | str, experiment: str) -> ExperimentConfig:
    raw_bytes = text.encode("utf-8") if isinstance(text, str) else text
    try:
        doc = yaml.load(raw_bytes.decode("utf-8"), Loader=_StrictLoader)
    except (yaml.YAMLError, UnicodeDecodeError) as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if doc is None:
        doc = {}
    _keys(doc, TOP_KEYS, "config")
    if "experiment" in doc and doc["experiment"] != experiment:
        raise ConfigError(f"config is for {doc['experiment']!r}, not {experiment!r}")
    seed = _int(doc.get("seed", 0), "seed", 0, U64)
    reps = doc.get("realizations")
    if reps is not None:
        reps = _int(reps, "realizations", 1)
    grid = doc.get("grid", {}) or {}
    _keys(grid, GRID_KEYS, "grid")
    params = doc.get("params", {}) or {}
    _keys(params, set(map(str, params)), "params")  # shape check; names validated per experiment
    out = doc.get("output", {}) or {}
    _keys(out, OUTPUT_KEYS, "output")
    svg = out.get("svg", True)
    if not isinstance(svg, bool):
        raise ConfigError("output.svg must be true or false")
    name = out.get("name")
    if name is not None and (not isinstance(name, str) or not name or "/" in name or name.startswith(".")):
        raise ConfigError("output.name must be a plain file stem")
    d = out.get("dir")
    if d is not None and not isinstance(d, str):
        raise ConfigError("output.dir must be a string")
    return ExperimentConfig(experiment, seed, reps, dict(grid), dict(params), Path(d) if d else None, name, svg,
                            hashlib.sha256(raw_bytes).hexdigest(), doc)


def load_config(path, experiment: str) -> ExperimentConfig:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(data, experiment)
