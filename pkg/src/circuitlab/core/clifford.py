"""Clifford gates in binary symplectic form.

Pauli vectors are interleaved, ``v = (x1, z1, x2, z2, ...)``, and a
Hermitian Pauli string is ``P(v) = prod_j i^{x_j z_j} X_j^{x_j} Z_j^{z_j}``
(so ``x = z = 1`` is Y). A Clifford is stored as the symplectic matrix whose
column ``j`` is the image of the ``j``-th generator (X1, Z1, X2, Z2, ...)
together with the sign of each image.

For table lookups a Pauli on ``n`` qubits is an integer whose bits, most
significant first, are ``x1 z1 x2 z2 ...``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..errors import ParameterError
from .gates import PAULI, UnitaryGate

SP_ORDER = {1: 6, 2: 720}

# ---------------------------------------------------------------------------
# Pauli algebra


def symplectic_form(n: int) -> np.ndarray:
    om = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    for j in range(n):
        om[2 * j, 2 * j + 1] = om[2 * j + 1, 2 * j] = 1
    return om


def sym_inner(a: np.ndarray, b: np.ndarray) -> int:
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    return int((a[0::2] @ b[1::2] + a[1::2] @ b[0::2]) % 2)


def _g(x1, z1, x2, z2) -> int:
    if x1 == 0 and z1 == 0:
        return 0
    if x1 == 1 and z1 == 1:
        return z2 - x2
    if x1 == 1:
        return z2 * (2 * x2 - 1)
    return x2 * (1 - 2 * z2)


def pauli_product(a, b) -> tuple[int, np.ndarray]:
    """P(a) P(b) = i^k P(a + b); returns (k mod 4, a + b)."""
    k = 0
    ai = [int(t) for t in a]
    bi = [int(t) for t in b]
    for j in range(len(ai) // 2):
        k += _g(ai[2 * j], ai[2 * j + 1], bi[2 * j], bi[2 * j + 1])
    return k % 4, (np.asarray(a) ^ np.asarray(b)).astype(np.uint8)


def vec_to_index(v) -> int:
    out = 0
    for bit in v:
        out = (out << 1) | int(bit)
    return out


def index_to_vec(idx: int, n: int) -> np.ndarray:
    return np.array([(idx >> (2 * n - 1 - j)) & 1 for j in range(2 * n)], dtype=np.uint8)


def pauli_label(v) -> str:
    return "".join("IZXY"[2 * int(v[2 * j]) + int(v[2 * j + 1])] for j in range(len(v) // 2))


def pauli_from_label(label: str) -> np.ndarray:
    v = []
    for ch in label:
        c = "IZXY".index(ch)
        v += [c >> 1, c & 1]
    return np.array(v, dtype=np.uint8)


def pauli_matrix(v) -> np.ndarray:
    m = np.ones((1, 1), dtype=complex)
    for j in range(len(v) // 2):
        m = np.kron(m, PAULI["IZXY"[2 * int(v[2 * j]) + int(v[2 * j + 1])]])
    return m


# ---------------------------------------------------------------------------
# symplectic sampling by transvections (Koenig & Smolin construction)


def _transvection(k: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (v + sym_inner(k, v) * k) % 2


def _int2bits(i: int, n: int) -> np.ndarray:
    return np.array([(i >> j) & 1 for j in range(n)], dtype=np.int64)


def _find_transvection(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """h1, h2 with y = Z_h1 Z_h2 x."""
    nn = len(x)
    out0 = np.zeros(nn, dtype=np.int64)
    out1 = np.zeros(nn, dtype=np.int64)
    if np.array_equal(x, y):
        return out0, out1
    if sym_inner(x, y) == 1:
        return (x + y) % 2, out1
    z = np.zeros(nn, dtype=np.int64)
    for i in range(nn // 2):
        ii = 2 * i
        if (x[ii] + x[ii + 1]) != 0 and (y[ii] + y[ii + 1]) != 0:
            z[ii] = (x[ii] + y[ii]) % 2
            z[ii + 1] = (x[ii + 1] + y[ii + 1]) % 2
            if (z[ii] + z[ii + 1]) == 0:
                z[ii + 1] = 1
                if x[ii] != x[ii + 1]:
                    z[ii] = 1
            return (x + z) % 2, (y + z) % 2
    for i in range(nn // 2):
        ii = 2 * i
        if (x[ii] + x[ii + 1]) != 0 and (y[ii] + y[ii + 1]) == 0:
            if x[ii] == x[ii + 1]:
                z[ii + 1] = 1
            else:
                z[ii + 1] = x[ii]
                z[ii] = x[ii + 1]
            break
    for i in range(nn // 2):
        ii = 2 * i
        if (x[ii] + x[ii + 1]) == 0 and (y[ii] + y[ii + 1]) != 0:
            if y[ii] == y[ii + 1]:
                z[ii + 1] = 1
            else:
                z[ii + 1] = y[ii]
                z[ii] = y[ii + 1]
            break
    return (x + z) % 2, (y + z) % 2


def symplectic_from_index(i: int, n: int) -> np.ndarray:
    """The ``i``-th element of Sp(2n, 2); uniform over the group when ``i`` is.

    Returned with column ``j`` equal to the image of generator ``j``.
    """
    nn = 2 * n
    s = (1 << nn) - 1
    k = (i % s) + 1
    i //= s
    f1 = _int2bits(k, nn)
    e1 = np.zeros(nn, dtype=np.int64)
    e1[0] = 1
    t0, t1 = _find_transvection(e1, f1)
    bits = _int2bits(i % (1 << (nn - 1)), nn - 1)
    eprime = e1.copy()
    for j in range(2, nn):
        eprime[j] = bits[j - 1]
    h0 = _transvection(t1, _transvection(t0, eprime))
    if bits[0] == 1:
        f1 = f1 * 0
    g = np.eye(nn, dtype=np.int64)
    if n != 1:
        g[2:, 2:] = symplectic_from_index(i >> (nn - 1), n - 1).T
    for j in range(nn):
        row = g[j]
        row = _transvection(t0, row)
        row = _transvection(t1, row)
        row = _transvection(h0, row)
        row = _transvection(f1, row)
        g[j] = row
    # rows of g are images; store images as columns
    return g.T.astype(np.uint8)


def is_symplectic(m: np.ndarray) -> bool:
    m = np.asarray(m, dtype=np.int64)
    om = symplectic_form(m.shape[0] // 2).astype(np.int64)
    return bool(np.array_equal((m.T @ om @ m) % 2, om))


# ---------------------------------------------------------------------------
# Clifford gate


@dataclass(frozen=True, eq=False)
class CliffordGate:
    symplectic: np.ndarray
    phases: np.ndarray
    name: str = ""
    index: int | None = None  # global id 16*sym_index + sign_bits for sampled 2-qubit gates
    dense: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        s = np.asarray(self.symplectic, dtype=np.uint8) % 2
        ph = np.asarray(self.phases, dtype=np.int8)
        if s.shape != (2 * self.n, 2 * self.n) or ph.shape != (2 * self.n,):
            raise ParameterError("symplectic matrix / phase vector shape mismatch")
        if not np.all(np.isin(ph, (-1, 1))):
            raise ParameterError("phases must be +1 or -1")
        if not is_symplectic(s):
            raise ParameterError("matrix does not preserve the symplectic form")
        s.setflags(write=False)
        ph.setflags(write=False)
        object.__setattr__(self, "symplectic", s)
        object.__setattr__(self, "phases", ph)

    @property
    def n(self) -> int:
        return np.asarray(self.symplectic).shape[0] // 2

    @property
    def nsites(self) -> int:
        return self.n

    label = "clifford"

    def conjugate(self, v) -> tuple[int, np.ndarray]:
        """U P(v) U^dag = sign * P(v')."""
        v = np.asarray(v, dtype=np.uint8)
        k = int(np.sum(v[0::2] & v[1::2]))  # P(v) = i^k prod of generators in order
        acc = np.zeros(2 * self.n, dtype=np.uint8)
        sign = 1
        for j in np.flatnonzero(v):
            img = self.symplectic[:, j]
            if self.phases[j] < 0:
                sign = -sign
            dk, acc = pauli_product(acc, img)
            k += dk
        k %= 4
        if k % 2:
            raise AssertionError("non-Hermitian image; symplectic data inconsistent")
        return (sign if k == 0 else -sign), acc

    def table(self) -> tuple[np.ndarray, np.ndarray]:
        """(out_index, sign_bit) arrays over all 4^n input Pauli indices."""
        return _table(self)

    def to_dense(self) -> np.ndarray:
        if self.dense is not None:
            return self.dense
        return clifford_to_dense(self)

    def to_unitary_gate(self) -> UnitaryGate:
        return UnitaryGate(self.to_dense(), "clifford", 2, self.name)

    def compose(self, other: "CliffordGate") -> "CliffordGate":
        """Gate for applying ``other`` first, then ``self``."""
        cols, ph = [], []
        for j in range(2 * self.n):
            e = np.zeros(2 * self.n, dtype=np.uint8)
            e[j] = 1
            s1, v1 = other.conjugate(e)
            s2, v2 = self.conjugate(v1)
            cols.append(v2)
            ph.append(s1 * s2)
        return CliffordGate(np.array(cols).T, np.array(ph))

    def key(self) -> bytes:
        out, sgn = self.table()
        return out.tobytes() + sgn.tobytes()


def _table(gate: CliffordGate):
    n4 = 4**gate.n
    out = np.zeros(n4, dtype=np.uint8)
    sgn = np.zeros(n4, dtype=np.uint8)
    for idx in range(n4):
        s, v = gate.conjugate(index_to_vec(idx, gate.n))
        out[idx] = vec_to_index(v)
        sgn[idx] = 1 if s < 0 else 0
    return out, sgn


def signs_from_bits(bits: int, n: int) -> np.ndarray:
    """Sign bits, most significant = first generator, as a +/-1 vector."""
    return np.array([-1 if (bits >> (2 * n - 1 - j)) & 1 else 1 for j in range(2 * n)], dtype=np.int8)


def clifford_from_id(gid: int, n: int = 2) -> CliffordGate:
    sym_idx, sbits = divmod(int(gid), 4**n)
    return CliffordGate(symplectic_from_index(sym_idx, n), signs_from_bits(sbits, n), index=int(gid))


def sample_clifford2(rng: np.random.Generator) -> CliffordGate:
    """Uniform two-qubit Clifford modulo global phase."""
    return clifford_from_id(int(rng.integers(0, SP_ORDER[2] * 16)), 2)


def sample_clifford1(rng: np.random.Generator) -> CliffordGate:
    return clifford_from_id(int(rng.integers(0, SP_ORDER[1] * 4)), 1)


@lru_cache(maxsize=None)
def clifford2_tables() -> tuple[np.ndarray, np.ndarray]:
    """Lookup tables for all 11520 sampled two-qubit Cliffords, by id."""
    nsym = SP_ORDER[2]
    out = np.zeros((nsym * 16, 16), dtype=np.uint8)
    sgn = np.zeros((nsym * 16, 16), dtype=np.uint8)
    idx = np.arange(16)
    for i in range(nsym):
        o, s = CliffordGate(symplectic_from_index(i, 2), np.ones(4, dtype=np.int8)).table()
        for sb in range(16):
            par = np.array([bin(sb & k).count("1") & 1 for k in idx], dtype=np.uint8)
            out[16 * i + sb] = o
            sgn[16 * i + sb] = s ^ par
    out.setflags(write=False)
    sgn.setflags(write=False)
    return out, sgn


# ---------------------------------------------------------------------------
# dense <-> symplectic


def clifford_to_dense(gate: CliffordGate) -> np.ndarray:
    """A unitary (fixed up to global phase) with the gate's Pauli action."""
    n = gate.n
    d = 2**n
    imgs = {}
    for j in range(2 * n):
        e = np.zeros(2 * n, dtype=np.uint8)
        e[j] = 1
        s, v = gate.conjugate(e)
        imgs[j] = s * pauli_matrix(v)
    proj = np.eye(d, dtype=complex)
    for j in range(n):
        proj = proj @ (np.eye(d) + imgs[2 * j + 1]) / 2
    col = np.argmax(np.linalg.norm(proj, axis=0))
    psi0 = proj[:, col] / np.linalg.norm(proj[:, col])
    u = np.zeros((d, d), dtype=complex)
    for b in range(d):
        v = psi0.copy()
        for j in range(n):
            if (b >> (n - 1 - j)) & 1:
                v = imgs[2 * j] @ v
        u[:, b] = v
    return u


def clifford_from_dense(u: np.ndarray, name: str = "", tol: float = 1e-9) -> CliffordGate:
    """Symplectic form of a dense Clifford unitary; raises if not Clifford."""
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    n = int(round(np.log2(d)))
    cols, ph = [], []
    for j in range(2 * n):
        e = np.zeros(2 * n, dtype=np.uint8)
        e[j] = 1
        img = u @ pauli_matrix(e) @ u.conj().T
        found = None
        for idx in range(4**n):
            v = index_to_vec(idx, n)
            c = np.trace(pauli_matrix(v) @ img) / d
            if abs(abs(c) - 1) < tol:
                if abs(c.imag) > tol:
                    break
                found = (v, 1 if c.real > 0 else -1)
                break
            if abs(c) > tol:
                break
        if found is None:
            raise ParameterError(f"gate {name or ''} is not Clifford")
        cols.append(found[0])
        ph.append(found[1])
    return CliffordGate(np.array(cols).T, np.array(ph), name=name, dense=u)


@lru_cache(maxsize=None)
def named_clifford(name: str) -> CliffordGate:
    from . import gates

    return clifford_from_dense(gates.FIXED_GATES[name].matrix, name)


def enumerate_clifford_group(n: int = 2) -> dict[bytes, tuple[np.ndarray, np.ndarray]]:
    """Closure of {H, S on each qubit, CNOT} modulo phase.

    Returns conjugation tables ``(out, sign)`` keyed by their bytes; works on
    tables directly so it stays independent of the transvection sampler.
    """
    if n != 2:
        raise ParameterError("enumeration implemented for two qubits")
    h = named_clifford("H")
    s = named_clifford("S")
    eye1 = CliffordGate(np.eye(2, dtype=np.uint8), np.ones(2, dtype=np.int8))

    def on_pair(a: CliffordGate, b: CliffordGate) -> CliffordGate:
        sym = np.zeros((4, 4), dtype=np.uint8)
        sym[:2, :2] = a.symplectic
        sym[2:, 2:] = b.symplectic
        return CliffordGate(sym, np.concatenate([a.phases, b.phases]))

    gens = [g.table() for g in (on_pair(h, eye1), on_pair(eye1, h), on_pair(s, eye1),
                                on_pair(eye1, s), named_clifford("CNOT"))]
    start = (np.arange(16, dtype=np.uint8), np.zeros(16, dtype=np.uint8))
    seen = {start[0].tobytes() + start[1].tobytes(): start}
    queue = deque([start])
    while queue:
        out, sgn = queue.popleft()
        for gout, gsgn in gens:
            new = (gout[out], sgn ^ gsgn[out])
            k = new[0].tobytes() + new[1].tobytes()
            if k not in seen:
                seen[k] = new
                queue.append(new)
    return seen
