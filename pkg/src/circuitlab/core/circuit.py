"""Circuit intermediate representation and geometry builders.

A :class:`Circuit` is an ordered tuple of layers; each layer is a tuple of
events touching disjoint sites. Sites are 0-indexed, so the "odd bonds"
(1,2),(3,4),... of the usual 1-indexed brickwork are (0,1),(2,3),... here.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from ..errors import InvalidGeometryError, ParameterError
from . import gates as _g
from .clifford import CliffordGate, clifford_from_id, sample_clifford2, SP_ORDER

BASES = ("X", "Y", "Z")


@dataclass(frozen=True, eq=False)
class GateEvent:
    sites: tuple
    gate: object  # UnitaryGate | CliffordGate | None (geometry only)

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))
        if len(set(self.sites)) != len(self.sites):
            raise ParameterError(f"gate sites must be distinct, got {self.sites}")


@dataclass(frozen=True)
class MeasureEvent:
    site: int
    basis: str = "Z"

    def __post_init__(self):
        if self.basis not in BASES:
            raise ParameterError(f"measurement basis must be one of {BASES}")

    @property
    def sites(self) -> tuple:
        return (self.site,)


Event = Union[GateEvent, MeasureEvent]


@dataclass(frozen=True, eq=False)
class Circuit:
    L: int
    layers: tuple
    boundary: str = "open"
    geometry: str = "brickwork"
    q: int = 2
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.boundary not in ("open", "periodic"):
            raise InvalidGeometryError(f"unknown boundary {self.boundary!r}")
        layers = tuple(tuple(layer) for layer in self.layers)
        for t, layer in enumerate(layers):
            used: set[int] = set()
            for ev in layer:
                for s in ev.sites:
                    if not 0 <= s < self.L:
                        raise InvalidGeometryError(f"site {s} out of range in layer {t}")
                    if s in used:
                        raise InvalidGeometryError(f"layer {t} touches site {s} twice")
                    used.add(s)
        object.__setattr__(self, "layers", layers)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def events(self):
        for t, layer in enumerate(self.layers):
            for ev in layer:
                yield t, ev

    @property
    def n_gates(self) -> int:
        return sum(isinstance(ev, GateEvent) for _, ev in self.events())

    @property
    def n_measurements(self) -> int:
        return sum(isinstance(ev, MeasureEvent) for _, ev in self.events())

    def is_unitary(self) -> bool:
        return self.n_measurements == 0

    def truncate(self, n_layers: int) -> "Circuit":
        return Circuit(self.L, self.layers[:n_layers], self.boundary, self.geometry, self.q, dict(self.meta))

    def unitary_layer_count(self) -> int:
        return sum(any(isinstance(ev, GateEvent) for ev in layer) for layer in self.layers)


# ---------------------------------------------------------------------------
# gate ensembles


def gate_sampler(gate_spec, q: int = 2) -> Callable[[np.random.Generator], object]:
    """Resolve a gate spec into ``rng -> gate``.

    Accepted specs: "haar", "clifford", "u1", "dual-unitary", a fixed gate
    name ("CZ", "CNOT", "SWAP", "I2"), a dict ``{"kind": "dual-unitary",
    "J": 0.3}``, a gate object (reused), a callable, or None (geometry only).
    """
    if gate_spec is None:
        return lambda rng: None
    if callable(gate_spec) and not isinstance(gate_spec, (_g.UnitaryGate, CliffordGate)):
        return gate_spec
    if isinstance(gate_spec, (_g.UnitaryGate, CliffordGate)):
        return lambda rng: gate_spec
    if isinstance(gate_spec, dict):
        kind = gate_spec.get("kind")
        if kind == "dual-unitary":
            J = gate_spec.get("J")
            return lambda rng: _g.make_dual_unitary(rng.uniform(0, np.pi / 4) if J is None else J, rng=rng)
        return gate_sampler(kind, q)
    if gate_spec == "haar":
        return lambda rng: _g.sample_haar_gate(q, rng)
    if gate_spec == "clifford":
        if q != 2:
            raise ParameterError("Clifford gates require q = 2")
        return sample_clifford2
    if gate_spec in ("u1", "u1-block"):
        if q != 2:
            raise ParameterError("U(1) gates are defined for qubits")
        return _g.sample_u1_gate
    if gate_spec == "dual-unitary":
        return lambda rng: _g.make_dual_unitary(rng.uniform(0, np.pi / 4), rng=rng)
    if gate_spec in _g.FIXED_GATES:
        g = _g.FIXED_GATES[gate_spec]
        return lambda rng: g
    raise ParameterError(f"unknown gate spec {gate_spec!r}")


# ---------------------------------------------------------------------------
# geometry builders


def brickwork_bonds(L: int, layer: int, boundary: str = "open") -> list[tuple[int, int]]:
    """Bonds gated in 1-indexed layer ``layer``: first sites even if odd layer."""
    start = 0 if layer % 2 == 1 else 1
    bonds = [(i, i + 1) for i in range(start, L - 1, 2)]
    if boundary == "periodic" and start == 1 and L > 2:
        bonds.append((L - 1, 0))
    return bonds


def build_brickwork(L: int, depth: int, boundary: str = "open", gate_spec="haar",
                    rng: np.random.Generator | None = None, q: int = 2) -> Circuit:
    if L < 2:
        raise InvalidGeometryError("brickwork needs L >= 2")
    if depth < 1:
        raise ParameterError("depth must be >= 1")
    if boundary == "periodic" and L % 2:
        raise InvalidGeometryError("periodic brickwork needs even L")
    rng = rng if rng is not None else np.random.default_rng()
    sample = gate_sampler(gate_spec, q)
    layers = []
    for tau in range(1, depth + 1):
        layers.append(tuple(GateEvent(b, sample(rng)) for b in brickwork_bonds(L, tau, boundary)))
    return Circuit(L, tuple(layers), boundary, "brickwork", q)


def poisson_events(L: int, duration: float, rate: float, rng: np.random.Generator,
                   boundary: str = "open") -> tuple[np.ndarray, np.ndarray]:
    """Independent Poisson gate processes on every bond.

    Returns ``(times, bonds)`` sorted by time, ties broken by bond index;
    bond ``b`` couples sites ``b`` and ``b + 1`` (mod L if periodic).
    """
    if not rate > 0:
        raise ParameterError("Poisson rate must be > 0")
    if duration < 0:
        raise ParameterError("duration must be >= 0")
    nb = L if boundary == "periodic" else L - 1
    counts = rng.poisson(rate * duration, size=nb)
    bonds = np.repeat(np.arange(nb), counts)
    times = rng.uniform(0.0, duration, size=bonds.size)
    order = np.lexsort((bonds, times))
    return times[order], bonds[order]


def build_poisson_circuit(L: int, duration: float, rate: float, rng: np.random.Generator,
                          gate_spec="haar", boundary: str = "open", q: int = 2) -> Circuit:
    if L < 2:
        raise InvalidGeometryError("Poisson circuit needs L >= 2")
    times, bonds = poisson_events(L, duration, rate, rng, boundary)
    sample = gate_sampler(gate_spec, q)
    layers, layer_times = [], []
    cur, used = [], set()
    for t, b in zip(times, bonds):
        sites = (int(b), int((b + 1) % L))
        if used.intersection(sites):
            layers.append(tuple(cur))
            cur, used = [], set()
        if not cur:
            layer_times.append(float(t))
        cur.append(GateEvent(sites, sample(rng)))
        used.update(sites)
    if cur:
        layers.append(tuple(cur))
    return Circuit(L, tuple(layers), boundary, "poisson", q,
                   {"duration": float(duration), "rate": float(rate), "layer_start_times": layer_times})


def place_measurements(circuit: Circuit, p: float, rng: np.random.Generator, basis: str = "Z") -> Circuit:
    """After each layer containing gates, measure every site with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"measurement probability must lie in [0, 1], got {p}")
    if p == 0.0:
        return circuit
    layers = []
    for layer in circuit.layers:
        layers.append(layer)
        if any(isinstance(ev, GateEvent) for ev in layer):
            hit = np.flatnonzero(rng.random(circuit.L) < p)
            layers.append(tuple(MeasureEvent(int(s), basis) for s in hit))
    return Circuit(circuit.L, tuple(layers), circuit.boundary, circuit.geometry, circuit.q, dict(circuit.meta))


def build_all_to_all(L: int, steps: int, p: float, rng: np.random.Generator, gate_spec="clifford",
                     q: int = 2) -> Circuit:
    """Per micro-step: with probability p measure a random qubit, else gate a random pair."""
    if L < 2:
        raise InvalidGeometryError("all-to-all circuit needs L >= 2")
    if not 0.0 <= p <= 1.0:
        raise ParameterError("p must lie in [0, 1]")
    sample = gate_sampler(gate_spec, q)
    layers = []
    for _ in range(steps):
        if rng.random() < p:
            layers.append((MeasureEvent(int(rng.integers(L))),))
        else:
            a, b = rng.choice(L, size=2, replace=False)
            layers.append((GateEvent((int(a), int(b)), sample(rng)),))
    return Circuit(L, tuple(layers), "open", "all-to-all", q)


# ---------------------------------------------------------------------------
# canonical JSON


def _gate_to_obj(gate):
    if gate is None:
        return None
    if isinstance(gate, CliffordGate):
        return {"kind": "clifford", "name": gate.name, "id": gate.index,
                "symplectic": gate.symplectic.astype(int).tolist(), "phases": gate.phases.astype(int).tolist()}
    m = gate.matrix
    rows = [[[float(z.real), float(z.imag)] for z in row] for row in m]
    return {"kind": gate.label, "name": gate.name, "q": gate.q, "matrix": rows}


def _gate_from_obj(obj):
    if obj is None:
        return None
    if obj["kind"] == "clifford":
        if obj.get("id") is not None:
            g = clifford_from_id(obj["id"])
            if g.symplectic.tolist() == obj["symplectic"] and g.phases.tolist() == obj["phases"]:
                return g
        return CliffordGate(np.array(obj["symplectic"]), np.array(obj["phases"]), name=obj.get("name", ""),
                            index=obj.get("id"))
    m = np.array([[complex(re, im) for re, im in row] for row in obj["matrix"]])
    return _g.UnitaryGate(m, obj["kind"], obj.get("q", 2), obj.get("name", ""))


def to_json(circuit: Circuit) -> str:
    layers = []
    for layer in circuit.layers:
        evs = []
        for ev in layer:
            if isinstance(ev, MeasureEvent):
                evs.append({"type": "measure", "sites": [ev.site], "basis": ev.basis})
            else:
                evs.append({"type": "gate", "sites": list(ev.sites), "gate": _gate_to_obj(ev.gate)})
        layers.append(evs)
    doc = {"L": circuit.L, "q": circuit.q, "boundary": circuit.boundary, "geometry": circuit.geometry,
           "meta": circuit.meta, "layers": layers}
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)


def from_json(text: str) -> Circuit:
    doc = json.loads(text)
    layers = []
    for layer in doc["layers"]:
        evs = []
        for ev in layer:
            if ev["type"] == "measure":
                evs.append(MeasureEvent(ev["sites"][0], ev["basis"]))
            else:
                evs.append(GateEvent(tuple(ev["sites"]), _gate_from_obj(ev["gate"])))
        layers.append(tuple(evs))
    return Circuit(doc["L"], tuple(layers), doc["boundary"], doc["geometry"], doc["q"], doc.get("meta", {}))


__all__ = [
    "GateEvent", "MeasureEvent", "Circuit", "build_brickwork", "build_poisson_circuit", "poisson_events",
    "place_measurements", "build_all_to_all", "brickwork_bonds", "gate_sampler", "to_json", "from_json",
    "SP_ORDER",
]
