"""Dense gate ensembles: Haar, U(1)-block, dual-unitary and fixed gates."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from ..errors import ParameterError

GATE_KINDS = ("haar", "clifford", "u1-block", "dual-unitary", "fixed")

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True, eq=False)
class UnitaryGate:
    """A dense one- or two-site gate acting on sites of local dimension ``q``.

    Two-site matrices use the row index ``(o1, o2)`` and column index
    ``(i1, i2)`` with the first site most significant.
    """

    matrix: np.ndarray
    label: str = "fixed"
    q: int = 2
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ParameterError(f"gate matrix must be square, got shape {m.shape}")
        if self.label not in GATE_KINDS:
            raise ParameterError(f"unknown gate kind {self.label!r}")
        if m.shape[0] not in (self.q, self.q**2):
            raise ParameterError(f"dimension {m.shape[0]} is neither q nor q^2 for q={self.q}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def nsites(self) -> int:
        return 1 if self.dim == self.q else 2

    def unitarity_error(self) -> float:
        return unitarity_error(self.matrix)


def unitarity_error(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def is_unitary(m: np.ndarray, tol: float = 1e-10) -> bool:
    return unitarity_error(m) < tol


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random element of U(n).

    QR of a complex Ginibre matrix, with the diagonal of R made real and
    positive so the factorization (and hence the distribution) is exact.
    """
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    qm, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return qm * (d / np.abs(d))


def sample_haar_gate(q: int, rng: np.random.Generator) -> UnitaryGate:
    if q < 2:
        raise ParameterError("local dimension q must be >= 2")
    return UnitaryGate(haar_unitary(q * q, rng), "haar", q)


def sample_haar_single(q: int, rng: np.random.Generator) -> UnitaryGate:
    return UnitaryGate(haar_unitary(q, rng), "haar", q)


def sample_u1_gate(rng: np.random.Generator) -> UnitaryGate:
    """Two-qubit gate conserving Z1 + Z2.

    Basis order |00>,|01>,|10>,|11> with 0 = up. The one-dimensional sectors
    get independent random phases, the {01, 10} sector a Haar U(2) block.
    """
    m = np.zeros((4, 4), dtype=complex)
    phases = np.exp(2j * np.pi * rng.random(2))
    m[0, 0] = phases[0]
    m[3, 3] = phases[1]
    m[1:3, 1:3] = haar_unitary(2, rng)
    return UnitaryGate(m, "u1-block", 2)


def charge_sectors_mixed(m: np.ndarray) -> float:
    """Largest |entry| connecting different total-Z sectors of a 2-qubit gate."""
    charge = np.array([0, 1, 1, 2])
    mask = charge[:, None] != charge[None, :]
    return float(np.max(np.abs(np.asarray(m)[mask])))


# ---------------------------------------------------------------------------
# fixed gates

def _fixed(m, name) -> UnitaryGate:
    return UnitaryGate(np.asarray(m, dtype=complex), "fixed", 2, name)


CZ = _fixed(np.diag([1, 1, 1, -1]), "CZ")
CNOT = _fixed([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], "CNOT")
SWAP = _fixed([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], "SWAP")
IDENTITY2 = _fixed(np.eye(4), "I2")
H = _fixed(np.array([[1, 1], [1, -1]]) / np.sqrt(2), "H")
S = _fixed(np.diag([1, 1j]), "S")

FIXED_GATES = {g.name: g for g in (CZ, CNOT, SWAP, IDENTITY2, H, S)}


# ---------------------------------------------------------------------------
# dual-unitary gates

def xxz_kernel(J: float) -> np.ndarray:
    """exp[-i (pi/4)(XX + YY) - i J ZZ]."""
    X, Y, Z = PAULI["X"], PAULI["Y"], PAULI["Z"]
    h = (np.pi / 4) * (np.kron(X, X) + np.kron(Y, Y)) + J * np.kron(Z, Z)
    return expm(-1j * h)


def make_dual_unitary(J: float, v1=None, v2=None, v3=None, v4=None,
                      rng: np.random.Generator | None = None) -> UnitaryGate:
    """(v1 x v2) V(J) (v3 x v4); missing dressings are Haar-sampled if ``rng``
    is given, identity otherwise."""
    vs = []
    for v in (v1, v2, v3, v4):
        if v is None:
            v = haar_unitary(2, rng) if rng is not None else np.eye(2)
        vs.append(np.asarray(v, dtype=complex))
    m = np.kron(vs[0], vs[1]) @ xxz_kernel(J) @ np.kron(vs[2], vs[3])
    return UnitaryGate(m, "dual-unitary", 2, meta={"J": float(J)})


def spacetime_flip(gate) -> np.ndarray:
    """Reshuffle U[(o1 o2),(i1 i2)] into W[(i2 o2),(i1 o1)]. No normalization."""
    m = gate.matrix if isinstance(gate, UnitaryGate) else np.asarray(gate)
    d2 = m.shape[0]
    q = int(round(np.sqrt(d2)))
    if q * q != d2:
        raise ParameterError("spacetime_flip needs a two-site gate")
    t = m.reshape(q, q, q, q)  # o1, o2, i1, i2
    return np.transpose(t, (3, 1, 2, 0)).reshape(d2, d2)  # i2, o2, i1, o1


def is_dual_unitary(gate, tol: float = 1e-10) -> bool:
    m = gate.matrix if isinstance(gate, UnitaryGate) else np.asarray(gate)
    return is_unitary(m, tol) and is_unitary(spacetime_flip(m), tol)
