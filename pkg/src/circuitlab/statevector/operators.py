"""Dense operator dynamics: Heisenberg evolution, Pauli weights, OTOCs,
two-point functions and the spectral form factor.

Traces are normalized, Tr[1] = 1. The evolved operator follows the
convention O(r, t) = U(t) O(r, 0) U(t)^dag.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.circuit import Circuit, GateEvent
from ..core.gates import PAULI, haar_unitary
from ..errors import CapExceededError, ParameterError
from .state import _matrix_of, apply_matrix

DENSE_CAP = 10
SFF_CAP = 2**12

# Pauli codes 2x + z: I, Z, X, Y (matches the Clifford table ordering)
CODE_LABELS = "IZXY"
_PAULI_BY_CODE = [PAULI[c] for c in CODE_LABELS]


@dataclass
class HeisenbergOperator:
    L: int
    matrix: np.ndarray

    def norm(self) -> float:
        """Normalized Tr[O^dag O]."""
        return float(np.vdot(self.matrix, self.matrix).real / self.matrix.shape[0])


@dataclass
class PauliWeights:
    L: int
    weights: np.ndarray  # length 4^L, index = base-4 digits of site codes (site 0 most significant)
    site_density: np.ndarray
    right_endpoint: np.ndarray
    left_endpoint: np.ndarray

    def as_dict(self, tol: float = 1e-14) -> dict[str, float]:
        out = {}
        for idx in np.flatnonzero(self.weights > tol):
            out[pauli_string_label(int(idx), self.L)] = float(self.weights[idx])
        return out


def pauli_string_label(idx: int, L: int) -> str:
    return "".join(CODE_LABELS[(idx >> (2 * (L - 1 - j))) & 3] for j in range(L))


def local_pauli(L: int, site: int, pauli: str = "Z") -> np.ndarray:
    m = np.ones((1, 1), dtype=complex)
    for s in range(L):
        m = np.kron(m, PAULI[pauli] if s == site else np.eye(2))
    return m


def _check_cap(L: int, cap: int):
    if L > cap:
        raise CapExceededError(f"dense operator engine capped at L={cap}, got L={L}")


def heisenberg_evolve(circuit: Circuit, site: int, pauli: str = "Z", t: int | None = None,
                      cap: int = DENSE_CAP) -> HeisenbergOperator:
    """U O U^dag for the single-site Pauli at ``site`` and the first ``t`` layers.

    Gates disjoint from the operator's current support are skipped, so the
    result is exactly the identity outside the geometric light cone.
    """
    L = circuit.L
    _check_cap(L, cap)
    if circuit.q != 2:
        raise ParameterError("Pauli operator evolution needs q = 2")
    layers = circuit.layers if t is None else circuit.layers[:t]
    # operator as a 2L-leg tensor: row legs 0..L-1, column legs L..2L-1
    op = local_pauli(L, site, pauli).reshape((2,) * (2 * L))
    support = {site}
    for layer in layers:
        for ev in layer:
            if not isinstance(ev, GateEvent):
                raise ParameterError("Heisenberg evolution is defined for unitary circuits")
            if not support.intersection(ev.sites):
                continue
            m = _matrix_of(ev.gate)
            op = apply_matrix(op, m, ev.sites, 2)
            op = apply_matrix(op, m.conj(), [L + s for s in ev.sites], 2)
            support.update(ev.sites)
    return HeisenbergOperator(L, op.reshape(2**L, 2**L))


def pauli_weights(op: HeisenbergOperator) -> PauliWeights:
    """a_S = Tr[S O] (normalized) for every Pauli string S; returns a_S^2."""
    L = op.L
    t = op.matrix.reshape((2,) * (2 * L))
    perm = [ax for s in range(L) for ax in (s, L + s)]
    t = np.transpose(t, perm).reshape((4,) * L)
    # M[s, (r, c)] = sigma_s[c, r] / 2
    basis = np.stack([p.T.reshape(4) for p in _PAULI_BY_CODE]) / 2
    for s in range(L):
        t = apply_matrix(t, basis, (s,), 4)
    a = t.reshape(-1)
    w = np.abs(a) ** 2
    codes = np.arange(4**L)
    digits = np.stack([(codes >> (2 * (L - 1 - j))) & 3 for j in range(L)], axis=1)
    nonid = digits != 0
    site_density = w @ nonid
    right = np.zeros(L)
    left = np.zeros(L)
    has = nonid.any(axis=1)
    r_end = np.where(has, L - 1 - np.argmax(nonid[:, ::-1], axis=1), -1)
    l_end = np.where(has, np.argmax(nonid, axis=1), -1)
    np.add.at(right, r_end[has], w[has])
    np.add.at(left, l_end[has], w[has])
    return PauliWeights(L, w, site_density, right, left)


def otoc(circuit: Circuit, r: int, t: int, ref: int = 0, pauli: str = "Z", cap: int = DENSE_CAP) -> float:
    """-1/2 Tr([O(r,t), O(ref,0)]^2) = 1 - Re Tr[O(r,t) W O(r,t) W]."""
    a = heisenberg_evolve(circuit, r, pauli, t, cap).matrix
    d = a.shape[0]
    w = local_pauli(circuit.L, ref, pauli)
    aw = a @ w
    return float(1.0 - np.real(np.trace(aw @ aw)) / d)


def two_point_value(circuit: Circuit, r: int, t: int, ref: int = 0, pauli: str = "Z",
                    cap: int = DENSE_CAP) -> float:
    """G(r, t) = Tr[O(r,t) O(ref,0)] for one circuit."""
    a = heisenberg_evolve(circuit, r, pauli, t, cap).matrix
    d = a.shape[0]
    # O(ref, 0) is a single-site Pauli: Tr[A W] = sum of diag of A W
    w = local_pauli(circuit.L, ref, pauli)
    return float(np.real(np.sum(a * w.T)) / d)


@dataclass
class TwoPointResult:
    mean_g2: float
    stderr_g2: float
    mean_g: float  # sign-convention dependent; reported for completeness
    stderr_g: float
    n: int


def two_point(circuits, r: int, t: int, ref: int = 0, pauli: str = "Z", cap: int = DENSE_CAP) -> TwoPointResult:
    g = np.array([two_point_value(c, r, t, ref, pauli, cap) for c in circuits])
    n = len(g)
    se = (lambda x: float(np.std(x, ddof=1) / np.sqrt(n)) if n > 1 else 0.0)
    return TwoPointResult(float(np.mean(g**2)), se(g**2), float(np.mean(g)), se(g), n)


# ---------------------------------------------------------------------------
# spectral form factor


def cue_sampler(dim: int):
    return lambda rng: haar_unitary(dim, rng)


def sff(source, t_max: int, samples: int = 1, rng: np.random.Generator | None = None,
        cap: int = SFF_CAP) -> np.ndarray:
    """Mean K(t) = |Tr W^t|^2 for t = 0..t_max.

    ``source`` is a fixed unitary (then ``samples`` is ignored) or a callable
    ``rng -> unitary``. Powers are taken on the eigenphases.
    """
    if callable(source):
        if rng is None:
            raise ParameterError("a sampler needs an rng")
        mats = (source(rng) for _ in range(samples))
    else:
        mats = [np.asarray(source)]
    ts = np.arange(t_max + 1)
    acc = np.zeros(t_max + 1)
    count = 0
    for w in mats:
        if w.shape[0] > cap:
            raise CapExceededError(f"SFF dimension capped at {cap}")
        phases = np.angle(np.linalg.eigvals(w))
        tr = np.exp(1j * np.outer(ts, phases)).sum(axis=1)
        acc += np.abs(tr) ** 2
        count += 1
    return acc / count


def floquet_unitary(circuit: Circuit, cap_L: int = 12) -> np.ndarray:
    """Dense one-period unitary of a (unitary) circuit."""
    L = circuit.L
    if L > cap_L:
        raise CapExceededError(f"Floquet unitary capped at L={cap_L}")
    d = circuit.q**L
    u = np.eye(d, dtype=complex).reshape((circuit.q,) * L + (d,))
    for layer in circuit.layers:
        for ev in layer:
            if not isinstance(ev, GateEvent):
                raise ParameterError("Floquet operator needs a unitary circuit")
            u = apply_matrix(u, _matrix_of(ev.gate), ev.sites, circuit.q)
    return u.reshape(d, d)
