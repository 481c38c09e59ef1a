"""Monitored Clifford dynamics on tableaus: hybrid brickwork circuits,
purification, the reference-qubit probe, measurement-only Ising dynamics and
the measurement response of subsystem entropies."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core.circuit import brickwork_bonds
from ..core.clifford import SP_ORDER, clifford2_tables
from ..errors import InvalidGeometryError, ParameterError
from . import kernels as K
from .tableau import Tableau, quarters, tableau_init, tripartite_mi

N_CLIFFORD2 = SP_ORDER[2] * 16


@dataclass
class MonitoredRunResult:
    times: np.ndarray
    series: dict
    n_measurements: int = 0
    n_random: int = 0
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, s in self.series.items():
            if len(s) != len(self.times):
                raise ValueError(f"series {name!r} length differs from checkpoint count")


def _bond_arrays(L: int, boundary: str):
    """Bond endpoints of odd/even brickwork layers as padded int arrays."""
    odd = brickwork_bonds(L, 1, boundary)
    even = brickwork_bonds(L, 2, boundary)
    nb = max(len(odd), len(even), 1)
    a = np.zeros((2, nb), dtype=np.int64)
    b = np.zeros((2, nb), dtype=np.int64)
    for s, bonds in enumerate((odd, even)):
        for g, (i, j) in enumerate(bonds):
            a[s, g], b[s, g] = i, j
    return a, b, np.array([len(odd), len(even)], dtype=np.int64)


def _observe(tab: Tableau, L: int, name: str) -> float:
    if name == "half":
        return float(tab.entropy(range(L // 2)))
    if name == "purification":
        return float(tab.L - tab.k)
    if name == "tmi":
        return float(tripartite_mi(tab, *quarters(L)))
    if name == "k":
        return float(tab.k)
    if name == "ancilla":
        return float(tab.entropy([tab.L - 1]))
    raise ParameterError(f"unknown observable {name!r}")


def default_checkpoints(L: int, depth: int) -> np.ndarray:
    step = max(1, L // 8)
    cps = list(range(step, depth + 1, step))
    if not cps or cps[-1] != depth:
        cps.append(depth)
    return np.array(cps, dtype=np.int64)


def run_hybrid(tab: Tableau, depth: int, p: float, rng: np.random.Generator, L: int | None = None,
               boundary: str = "periodic", checkpoints=None, observables=("half",),
               start_layer: int = 1) -> MonitoredRunResult:
    """Clifford brickwork on sites 0..L-1, each layer followed by Z measurements
    with probability ``p`` per site; observables recorded after the checkpoint
    layers (counted from the start of this call).

    ``L`` defaults to the tableau size; a smaller value leaves the remaining
    qubits (ancillas) untouched.
    """
    L = tab.L if L is None else int(L)
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"measurement probability must lie in [0, 1], got {p}")
    if L < 2 or L > tab.L:
        raise InvalidGeometryError("hybrid circuit needs 2 <= L <= tableau size")
    if boundary == "periodic" and L % 2:
        raise InvalidGeometryError("periodic brickwork needs even L")
    cps = default_checkpoints(L, depth) if checkpoints is None else np.asarray(sorted(set(checkpoints)), dtype=np.int64)
    if cps.size and (cps[0] < 0 or cps[-1] > depth):
        raise ParameterError("checkpoints must lie in [0, depth]")
    ba, bb, nb = _bond_arrays(L, boundary)
    out_tab, sgn_tab = clifford2_tables()
    series = {name: [] for name in observables}
    done = 0
    nrand = nmeas = 0
    bounds = list(cps) + ([depth] if not cps.size or cps[-1] != depth else [])
    for stop in bounds:
        n = int(stop) - done
        if n > 0:
            gids = rng.integers(0, N_CLIFFORD2, size=(n, ba.shape[1]), dtype=np.int64)
            masks = rng.random((n, L)) < p
            rbits = rng.integers(0, 2, size=(n, L), dtype=np.uint8)
            k, nr, nm = K.hybrid_chunk(tab.x, tab.z, tab.r, tab.k, ba, bb, nb, start_layer + done,
                                       gids, masks, rbits, out_tab, sgn_tab, tab._px, tab._pz)
            tab.k = int(k)
            nrand += int(nr)
            nmeas += int(nm)
            done = int(stop)
        if stop in cps:
            for name in observables:
                series[name].append(_observe(tab, L, name))
    return MonitoredRunResult(cps.copy(), {k: np.array(v) for k, v in series.items()}, nmeas, nrand,
                              meta={"L": L, "p": p, "boundary": boundary})


def hybrid_state(L: int, depth: int, p: float, rng: np.random.Generator, boundary: str = "periodic",
                 kind: str = "all-up") -> Tableau:
    """Tableau after ``depth`` hybrid layers from a product (or mixed) state."""
    tab = tableau_init(L, kind)
    run_hybrid(tab, depth, p, rng, boundary=boundary, checkpoints=[], observables=())
    return tab


def purification_run(L: int, p: float, depth: int, rng: np.random.Generator, boundary: str = "periodic",
                     checkpoints=None) -> MonitoredRunResult:
    """Entropy L - k of an initially maximally mixed chain under hybrid dynamics."""
    tab = tableau_init(L, "maximally-mixed")
    return run_hybrid(tab, depth, p, rng, boundary=boundary, checkpoints=checkpoints,
                      observables=("purification",))


def reference_qubit_run(L: int, p: float, depth: int, rng: np.random.Generator, boundary: str = "periodic",
                        prelude: int | None = None, checkpoints=None) -> MonitoredRunResult:
    """Ancilla entropy under hybrid dynamics of the system it is entangled with.

    A unitary scrambling prelude of ``prelude`` layers (default L) prepares the
    system. The middle qubit is then measured and Bell-paired with the
    ancilla (qubit L), after which hybrid dynamics act on the system only.
    """
    prelude = L if prelude is None else int(prelude)
    tab = tableau_init(L + 1, "all-up")
    if prelude > 0:
        run_hybrid(tab, prelude, 0.0, rng, L=L, boundary=boundary, checkpoints=[], observables=())
    s = L // 2
    if tab.measure_site(s, "Z", rng)[0] < 0:
        tab.apply_clifford(_pauli_gate("X"), (s,))
    tab.apply_clifford("H", (L,))
    tab.apply_clifford("CNOT", (L, s))
    res = run_hybrid(tab, depth, p, rng, L=L, boundary=boundary, checkpoints=checkpoints,
                     observables=("ancilla",), start_layer=prelude + 1)
    res.meta["prelude"] = prelude
    return res


def _pauli_gate(c: str):
    from ..core.clifford import CliffordGate

    # X conjugation: X -> X, Z -> -Z
    ph = {"X": [1, -1], "Z": [-1, 1], "Y": [-1, -1]}[c]
    return CliffordGate(np.eye(2, dtype=np.uint8), np.array(ph), name=c)


@dataclass
class IsingRunResult:
    chi_sg: float
    times: np.ndarray
    chi_series: np.ndarray
    k: int


def measurement_only_ising(L: int, p_z: float, depth: int, rng: np.random.Generator,
                           checkpoints=None) -> IsingRunResult:
    """Measurement-only Z2 dynamics on a ring starting from all-plus.

    One time step is L micro-steps; each picks a uniformly random site i and
    measures Z_i Z_{i+1} with probability ``p_z``, otherwise X_i.
    """
    if not 0.0 <= p_z <= 1.0:
        raise ParameterError("p_Z must lie in [0, 1]")
    if L < 2:
        raise InvalidGeometryError("need L >= 2")
    tab = tableau_init(L, "all-plus")
    cps = default_checkpoints(L, depth) if checkpoints is None else np.asarray(sorted(set(checkpoints)), dtype=np.int64)
    done = 0
    chi = []
    for stop in list(cps) + ([depth] if not cps.size or cps[-1] != depth else []):
        n = (int(stop) - done) * L
        if n > 0:
            sites = rng.integers(0, L, size=n, dtype=np.int64)
            is_zz = rng.random(n) < p_z
            rbits = rng.integers(0, 2, size=n, dtype=np.uint8)
            tab.k = int(K.measurement_only_chunk(tab.x, tab.z, tab.r, tab.k, sites, is_zz, rbits, L,
                                                 tab._px, tab._pz))
            done = int(stop)
        if stop in cps:
            chi.append(tab.spin_glass())
    final = tab.spin_glass()
    return IsingRunResult(final, cps.copy(), np.array(chi), tab.k)


def delta_s_profile(tab: Tableau, A, sites) -> np.ndarray:
    """Entropy drop of region A for a Z measurement at each of ``sites`` (separately)."""
    from .tableau import delta_s_measurement

    return np.array([delta_s_measurement(tab, A, int(s)) for s in sites], dtype=np.int64)


def run_all_to_all(tab: Tableau, steps: int, p: float, rng: np.random.Generator) -> Tableau:
    """Per step: with probability p measure a random qubit in Z, else apply a
    uniformly random two-qubit Clifford to a random pair."""
    L = tab.L
    out_tab, sgn_tab = clifford2_tables()
    meas = rng.random(steps) < p
    for is_m in meas:
        if is_m:
            tab.measure_site(int(rng.integers(L)), "Z", rng)
        else:
            a, b = rng.choice(L, size=2, replace=False)
            gid = int(rng.integers(N_CLIFFORD2))
            K.apply2(tab.x, tab.z, tab.r, int(a), int(b), out_tab[gid], sgn_tab[gid])
    return tab
