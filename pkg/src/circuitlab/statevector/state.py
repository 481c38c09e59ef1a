"""Dense pure-state simulation: gates, Born-rule measurement, entropies."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core.circuit import Circuit, GateEvent, MeasureEvent
from ..core.clifford import CliffordGate
from ..core.gates import PAULI, UnitaryGate, unitarity_error
from ..errors import NumericalDegeneracyError, ParameterError

NORM_TOL = 1e-10
CLIP_TOL = 1e-12


@dataclass
class PureState:
    L: int
    q: int
    amps: np.ndarray

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if self.amps.size != self.q**self.L:
            raise ParameterError(f"expected {self.q ** self.L} amplitudes, got {self.amps.size}")

    @property
    def tensor(self) -> np.ndarray:
        return self.amps.reshape((self.q,) * self.L)

    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def copy(self) -> "PureState":
        return PureState(self.L, self.q, self.amps.copy())


@dataclass
class TrajectoryRecord:
    outcomes: list = field(default_factory=list)  # (layer, site, basis, outcome)
    log_prob: float = 0.0

    @property
    def m(self) -> list:
        return [o[3] for o in self.outcomes]


@dataclass
class EntropyResult:
    region: tuple
    n: object
    value: float
    spectrum: np.ndarray


def init_product(L: int, q: int = 2, kets=None) -> PureState:
    """Tensor product of local kets (one ket reused for every site if a single
    vector is given; default |0>)."""
    if kets is None:
        kets = np.eye(q)[0]
    kets = np.asarray(kets, dtype=complex)
    if kets.ndim == 1:
        kets = np.tile(kets, (L, 1))
    if kets.shape != (L, q):
        raise ParameterError(f"need {L} local kets of dimension {q}, got shape {kets.shape}")
    amps = np.ones(1, dtype=complex)
    for k in kets:
        if abs(np.vdot(k, k).real - 1) > NORM_TOL:
            raise ParameterError("local kets must be normalized")
        amps = np.kron(amps, k)
    return PureState(L, q, amps)


KET = {
    "up": np.array([1, 0], dtype=complex),
    "down": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
}


def random_state(L: int, q: int, rng: np.random.Generator) -> PureState:
    z = rng.standard_normal(q**L) + 1j * rng.standard_normal(q**L)
    return PureState(L, q, z / np.linalg.norm(z))


def _matrix_of(gate) -> np.ndarray:
    if isinstance(gate, UnitaryGate):
        return gate.matrix
    if isinstance(gate, CliffordGate):
        return gate.to_dense()
    return np.asarray(gate, dtype=complex)


def apply_matrix(psi: np.ndarray, m: np.ndarray, sites, q: int) -> np.ndarray:
    """Contract a k-site matrix into axes ``sites`` of tensor ``psi``."""
    k = len(sites)
    g = m.reshape((q,) * (2 * k))
    out = np.tensordot(g, psi, axes=(list(range(k, 2 * k)), list(sites)))
    return np.moveaxis(out, list(range(k)), list(sites))


def apply_gate(state: PureState, gate, sites, check: bool = True) -> PureState:
    sites = tuple(int(s) for s in np.atleast_1d(sites))
    if len(set(sites)) != len(sites) or any(not 0 <= s < state.L for s in sites):
        raise ParameterError(f"invalid gate sites {sites} for L={state.L}")
    m = _matrix_of(gate)
    if m.shape[0] != state.q ** len(sites):
        raise ParameterError("gate dimension does not match the number of sites")
    if check and unitarity_error(m) > NORM_TOL:
        raise ParameterError("gate is not unitary within 1e-10")
    state.amps = apply_matrix(state.tensor, m, sites, state.q).reshape(-1)
    return state


def _basis_op(basis: str) -> np.ndarray:
    return PAULI[basis]


def measure(state: PureState, site: int, basis: str = "Z", rng: np.random.Generator | None = None,
            outcome: int | None = None) -> tuple[int, float, PureState]:
    """Projective Pauli measurement on one qubit; ``outcome`` forces the branch."""
    if state.q != 2:
        raise ParameterError("Pauli measurements need q = 2")
    sigma = _basis_op(basis)
    psi = state.tensor
    proj = {+1: (np.eye(2) + sigma) / 2, -1: (np.eye(2) - sigma) / 2}
    branches = {m: apply_matrix(psi, proj[m], (site,), 2) for m in (+1, -1)}
    probs = {m: float(np.vdot(b, b).real) for m, b in branches.items()}
    if probs[+1] < CLIP_TOL and probs[-1] < CLIP_TOL:
        raise NumericalDegeneracyError("both measurement outcomes have vanishing probability")
    if outcome is None:
        rng = rng if rng is not None else np.random.default_rng()
        p_plus = probs[+1] / (probs[+1] + probs[-1])
        outcome = +1 if rng.random() < p_plus else -1
    elif probs[outcome] < CLIP_TOL:
        raise NumericalDegeneracyError(f"forced outcome {outcome} has vanishing probability")
    p = probs[outcome]
    state.amps = (branches[outcome] / np.sqrt(p)).reshape(-1)
    return outcome, p, state


def run_circuit(state: PureState, circuit: Circuit, rng: np.random.Generator | None = None,
                forced_outcomes=None) -> tuple[PureState, TrajectoryRecord]:
    """Apply all layers in order. ``forced_outcomes`` (iterable of +/-1) replaces
    Born sampling, in event order."""
    if circuit.L != state.L:
        raise ParameterError("circuit and state sizes differ")
    rec = TrajectoryRecord()
    forced = iter(forced_outcomes) if forced_outcomes is not None else None
    for t, layer in enumerate(circuit.layers):
        for ev in layer:
            if isinstance(ev, MeasureEvent):
                f = next(forced) if forced is not None else None
                m, p, _ = measure(state, ev.site, ev.basis, rng, outcome=f)
                rec.outcomes.append((t, ev.site, ev.basis, m))
                rec.log_prob += float(np.log(p))
            elif isinstance(ev, GateEvent):
                apply_gate(state, ev.gate, ev.sites)
    return state, rec


# ---------------------------------------------------------------------------
# entropies


def _region(region, L) -> tuple:
    reg = tuple(sorted({int(s) for s in region}))
    if any(not 0 <= s < L for s in reg):
        raise ParameterError(f"region {region} out of range for L={L}")
    return reg


def schmidt_spectrum(state: PureState, region) -> np.ndarray:
    """Eigenvalues of rho_A, descending, clipped at zero."""
    reg = _region(region, state.L)
    if len(reg) in (0, state.L):
        return np.ones(1)
    rest = [s for s in range(state.L) if s not in reg]
    m = np.transpose(state.tensor, list(reg) + rest).reshape(state.q ** len(reg), -1)
    rho = m @ m.conj().T if m.shape[0] <= m.shape[1] else m.T @ m.conj()
    lam = np.linalg.eigvalsh(rho)[::-1]
    lam = np.where((lam < 0) & (lam > -CLIP_TOL), 0.0, lam)
    return lam


def renyi_from_spectrum(lam: np.ndarray, n="vn") -> float:
    lam = lam[lam > 0]
    if n == "vn" or n == 1:
        return float(-np.sum(lam * np.log(lam)))
    if n == np.inf or n == "inf":
        return float(-np.log(lam.max()))
    n = float(n)
    if n <= 0:
        raise ParameterError("Renyi index must be positive")
    return float(np.log(np.sum(lam**n)) / (1.0 - n))


def entropy(state: PureState, region, n="vn") -> EntropyResult:
    reg = _region(region, state.L)
    if len(reg) in (0, state.L):
        raise ParameterError("entropy region must be a nonempty proper subset")
    lam = schmidt_spectrum(state, reg)
    return EntropyResult(reg, n, renyi_from_spectrum(lam, n), lam)


def entropy_value(state: PureState, region, n="vn") -> float:
    """Like :func:`entropy` but 0 for the empty or full region."""
    reg = _region(region, state.L)
    if len(reg) in (0, state.L):
        return 0.0
    return renyi_from_spectrum(schmidt_spectrum(state, reg), n)


def mutual_information(state: PureState, A, B, n="vn") -> float:
    A, B = set(A), set(B)
    if A & B:
        raise ParameterError("regions must be disjoint")
    return entropy_value(state, A, n) + entropy_value(state, B, n) - entropy_value(state, A | B, n)


def purity(state: PureState, region) -> float:
    lam = schmidt_spectrum(state, region)
    return float(np.sum(lam**2))


def expect_total_z(state: PureState) -> float:
    p = np.abs(state.tensor) ** 2
    tot = 0.0
    for s in range(state.L):
        marg = np.moveaxis(p, s, 0).reshape(2, -1).sum(axis=1)
        tot += marg[0] - marg[1]
    return float(tot)


def haar_purity(dA: int, dB: int) -> float:
    """Mean purity of a Haar-random pure state on dA x dB (Lubkin)."""
    return (dA + dB) / (dA * dB + 1)
