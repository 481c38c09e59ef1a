"""Stabilizer tableau with support for mixed states.

The tableau always stores a complete symplectic frame of 2L Pauli rows.
Stabilizer rows ``L..L+k-1`` generate the state's group; the pairs
``(j, L + j)`` for ``j >= k`` are logical operators of the mixed state, so
the frame is never thrown away when the state is impure. Entropies are
returned in bits.
"""
from __future__ import annotations

import numpy as np

from ..core.circuit import Circuit, GateEvent, MeasureEvent
from ..core.clifford import CliffordGate, clifford_from_dense, named_clifford
from ..core.gates import UnitaryGate
from ..errors import ParameterError
from . import kernels as K

BASIS_CODE = {"Z": 0, "X": 1, "Y": 2}
_PAULI_CHARS = "IXYZ"


def _words(L: int) -> int:
    return (L + 63) // 64


def _set(arr_row, j, b=1):
    w, s = divmod(j, 64)
    if b:
        arr_row[w] |= np.uint64(1) << np.uint64(s)
    else:
        arr_row[w] &= ~(np.uint64(1) << np.uint64(s))


def _get(arr_row, j) -> int:
    w, s = divmod(j, 64)
    return int((int(arr_row[w]) >> s) & 1)


def parse_pauli(P, L: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Signed Pauli -> packed (px, pz, sign_bit).

    Accepts a string like ``"-XIZ"`` (length L, optional sign), or a dict
    ``{site: "X"}`` for sparse operators.
    """
    W = _words(L)
    px = np.zeros(W, dtype=np.uint64)
    pz = np.zeros(W, dtype=np.uint64)
    sign = 0
    if isinstance(P, dict):
        items = P.items()
    elif isinstance(P, str):
        s = P.strip()
        if s[:1] in "+-":
            sign = 1 if s[0] == "-" else 0
            s = s[1:]
        if len(s) != L:
            raise ParameterError(f"Pauli string {P!r} must have length {L}")
        items = enumerate(s)
    else:
        raise ParameterError(f"cannot interpret {P!r} as a Pauli string")
    for site, c in items:
        c = str(c).upper()
        if c not in _PAULI_CHARS or not 0 <= int(site) < L:
            raise ParameterError(f"malformed Pauli operator {P!r}")
        if c in "XY":
            _set(px, int(site))
        if c in "ZY":
            _set(pz, int(site))
    return px, pz, sign


def _as_clifford(gate) -> CliffordGate:
    if isinstance(gate, CliffordGate):
        return gate
    if isinstance(gate, str):
        return named_clifford(gate)
    if isinstance(gate, UnitaryGate):
        return clifford_from_dense(gate.matrix, gate.name)
    raise ParameterError(f"{type(gate).__name__} is not a Clifford gate")


class Tableau:
    def __init__(self, L: int, x: np.ndarray, z: np.ndarray, r: np.ndarray, k: int):
        self.L = L
        self.x = x
        self.z = z
        self.r = r
        self.k = int(k)
        self._px = np.zeros(x.shape[1], dtype=np.uint64)
        self._pz = np.zeros(x.shape[1], dtype=np.uint64)

    @classmethod
    def empty(cls, L: int) -> "Tableau":
        W = _words(L)
        return cls(L, np.zeros((2 * L, W), dtype=np.uint64), np.zeros((2 * L, W), dtype=np.uint64),
                   np.zeros(2 * L, dtype=np.uint8), 0)

    def copy(self) -> "Tableau":
        return Tableau(self.L, self.x.copy(), self.z.copy(), self.r.copy(), self.k)

    # -- gates -----------------------------------------------------------

    def apply_clifford(self, gate, sites) -> "Tableau":
        g = _as_clifford(gate)
        sites = tuple(int(s) for s in np.atleast_1d(sites))
        if len(sites) != g.n or len(set(sites)) != len(sites) or any(not 0 <= s < self.L for s in sites):
            raise ParameterError(f"invalid sites {sites} for a {g.n}-qubit gate on L={self.L}")
        out, sgn = g.table()
        if g.n == 1:
            K.apply1(self.x, self.z, self.r, sites[0], out, sgn)
        elif g.n == 2:
            K.apply2(self.x, self.z, self.r, sites[0], sites[1], out, sgn)
        else:
            raise ParameterError("only one- and two-qubit Cliffords are supported")
        return self

    def apply_layer(self, sa: np.ndarray, sb: np.ndarray, gids: np.ndarray, tables) -> "Tableau":
        """Apply sampled two-qubit Cliffords (by global id) on bonds (sa[i], sb[i])."""
        K.apply_layer(self.x, self.z, self.r, sa, sb, gids, tables[0], tables[1])
        return self

    # -- measurement -----------------------------------------------------

    def measure_pauli(self, P, rng: np.random.Generator | None = None,
                      outcome: int | None = None) -> tuple[int, bool, "Tableau"]:
        """Measure a signed Pauli; returns (outcome +/-1, was_random, self)."""
        px, pz, sign = parse_pauli(P, self.L)
        return self._measure(px, pz, sign, rng, outcome)

    def measure_site(self, site: int, basis: str = "Z", rng: np.random.Generator | None = None,
                     outcome: int | None = None) -> tuple[int, bool, "Tableau"]:
        if not 0 <= site < self.L:
            raise ParameterError(f"site {site} out of range")
        return self.measure_pauli({site: basis}, rng, outcome)

    def _measure(self, px, pz, sign, rng, outcome):
        if outcome is None:
            rng = rng if rng is not None else np.random.default_rng()
            rbit, force = int(rng.integers(0, 2)), -1
        else:
            if outcome not in (1, -1):
                raise ParameterError("outcome must be +1 or -1")
            rbit = force = (0 if outcome == 1 else 1) ^ sign
        bit, case, k = K.measure(self.x, self.z, self.r, self.k, px, pz, rbit, force)
        self.k = int(k)
        bit = int(bit) ^ sign
        if case == 1 and outcome is not None and (1 - 2 * bit) != outcome:
            from ..errors import NumericalDegeneracyError

            raise NumericalDegeneracyError("forced outcome has zero probability")
        return 1 - 2 * bit, case != 1, self

    # -- entropies -------------------------------------------------------

    def entropy(self, region) -> int:
        """Entropy of ``region`` in bits: |A| - k + rank(G restricted to the complement)."""
        reg = np.unique(np.asarray(list(region), dtype=np.int64))
        if reg.size and (reg[0] < 0 or reg[-1] >= self.L):
            raise ParameterError("region out of range")
        nA = reg.size
        comp = np.setdiff1d(np.arange(self.L), reg)
        if self.k == self.L and nA < comp.size:
            # pure state: S_A = S_complement, use the smaller side
            return int(K.restricted_rank(self.x, self.z, self.L, 2 * self.L, reg)) - nA
        return nA - self.k + int(K.restricted_rank(self.x, self.z, self.L, self.L + self.k, comp))

    def purification_entropy(self) -> int:
        return self.L - self.k

    def zz_classes(self) -> np.ndarray:
        """Label sites so that <Z_i Z_j>^2 = 1 iff labels agree."""
        rows = np.concatenate([np.arange(self.k, self.L), np.arange(self.L, 2 * self.L)])
        cols = K.x_columns(self.x[rows], 0, rows.size, self.L)
        _, labels = np.unique(cols, axis=0, return_inverse=True)
        return labels.reshape(-1)

    def spin_glass(self) -> float:
        """(1/L^2) sum_ij <Z_i Z_j>^2, diagonal included."""
        counts = np.bincount(self.zz_classes())
        return float(np.sum(counts.astype(np.float64) ** 2) / self.L**2)

    # -- inspection ------------------------------------------------------

    def row_label(self, i: int) -> str:
        chars = []
        for j in range(self.L):
            xb, zb = _get(self.x[i], j), _get(self.z[i], j)
            chars.append(_PAULI_CHARS[(xb and not zb) * 1 + (xb and zb) * 2 + (zb and not xb) * 3])
        return ("-" if self.r[i] else "+") + "".join(chars)

    def generators(self) -> list[str]:
        return [self.row_label(self.L + i) for i in range(self.k)]

    def check(self) -> None:
        """Assert the frame is symplectic: rows pair-anticommute only with partners."""
        L = self.L
        xb = np.array([[_get(self.x[i], j) for j in range(L)] for i in range(2 * L)], dtype=np.int64)
        zb = np.array([[_get(self.z[i], j) for j in range(L)] for i in range(2 * L)], dtype=np.int64)
        om = (xb @ zb.T + zb @ xb.T) % 2
        expect = np.zeros((2 * L, 2 * L), dtype=np.int64)
        expect[np.arange(L), np.arange(L, 2 * L)] = 1
        expect[np.arange(L, 2 * L), np.arange(L)] = 1
        if not np.array_equal(om, expect):
            raise AssertionError("tableau rows are not a symplectic basis")
        if not 0 <= self.k <= L:
            raise AssertionError("k out of range")

    # -- snapshot --------------------------------------------------------

    def snapshot(self) -> str:
        lines = ["circuitlab-tableau 1", f"L {self.L} k {self.k}"]
        for i in range(2 * self.L):
            tag = "D" if i < self.L else "S"
            xs = "".join(f"{int(w):016x}" for w in self.x[i])
            zs = "".join(f"{int(w):016x}" for w in self.z[i])
            lines.append(f"{tag} {xs} {zs} {int(self.r[i])}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_snapshot(cls, text: str) -> "Tableau":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != "circuitlab-tableau 1":
            raise ParameterError("not a tableau snapshot")
        _, L, _, k = lines[1].split()
        tab = cls.empty(int(L))
        W = tab.x.shape[1]
        for i, ln in enumerate(lines[2:]):
            _, xs, zs, r = ln.split()
            tab.x[i] = [int(xs[16 * w:16 * w + 16], 16) for w in range(W)]
            tab.z[i] = [int(zs[16 * w:16 * w + 16], 16) for w in range(W)]
            tab.r[i] = int(r)
        tab.k = int(k)
        return tab


def tableau_init(L: int, kind: str = "all-up", m=None) -> Tableau:
    """Initial tableaus: all-up (Z_i), all-plus (X_i), maximally-mixed (k = 0)
    or glassy (m_i Z_i Z_{i+1} and the parity prod X_i)."""
    if L < 1:
        raise ParameterError("L must be >= 1")
    tab = Tableau.empty(L)
    if kind in ("all-up", "maximally-mixed"):
        for j in range(L):
            _set(tab.x[j], j)
            _set(tab.z[L + j], j)
        tab.k = L if kind == "all-up" else 0
    elif kind == "all-plus":
        for j in range(L):
            _set(tab.z[j], j)
            _set(tab.x[L + j], j)
        tab.k = L
    elif kind == "glassy":
        m = np.ones(L - 1, dtype=int) if m is None else np.asarray(m)
        if m.shape != (L - 1,) or not np.all(np.isin(m, (-1, 1))):
            raise ParameterError("glassy init needs L-1 signs of +/-1")
        # stabilizers m_i Z_i Z_{i+1} (rows L..2L-2), prod X (row 2L-1)
        # destabilizers X_{i+1}..X_{L-1} and Z_0
        for i in range(L - 1):
            _set(tab.z[L + i], i)
            _set(tab.z[L + i], i + 1)
            tab.r[L + i] = 1 if m[i] < 0 else 0
            for j in range(i + 1, L):
                _set(tab.x[i], j)
        for j in range(L):
            _set(tab.x[2 * L - 1], j)
        _set(tab.z[L - 1], 0)
        tab.k = L
    else:
        raise ParameterError(f"unknown tableau kind {kind!r}")
    return tab


def stab_entropy(tab: Tableau, region) -> int:
    return tab.entropy(region)


def purification_entropy(tab: Tableau) -> int:
    return tab.purification_entropy()


def apply_clifford(tab: Tableau, gate, sites) -> Tableau:
    return tab.apply_clifford(gate, sites)


def measure_pauli(tab: Tableau, P, rng=None, outcome=None):
    return tab.measure_pauli(P, rng, outcome)


def run_circuit(tab: Tableau, circuit: Circuit, rng: np.random.Generator | None = None,
                forced_outcomes=None) -> tuple[Tableau, list]:
    """Apply a Clifford circuit; returns the tableau and (layer, site, basis, outcome, random) list."""
    if circuit.L != tab.L:
        raise ParameterError("circuit and tableau sizes differ")
    forced = iter(forced_outcomes) if forced_outcomes is not None else None
    record = []
    for t, layer in enumerate(circuit.layers):
        for ev in layer:
            if isinstance(ev, MeasureEvent):
                f = next(forced) if forced is not None else None
                m, was_random, _ = tab.measure_site(ev.site, ev.basis, rng, f)
                record.append((t, ev.site, ev.basis, m, was_random))
            elif isinstance(ev, GateEvent):
                tab.apply_clifford(ev.gate, ev.sites)
    return tab, record


def tripartite_mi(tab: Tableau, A, B, C) -> int:
    """I3 = S_A + S_B + S_C - S_AB - S_AC - S_BC + S_ABC (bits)."""
    A, B, C = set(A), set(B), set(C)
    if A & B or A & C or B & C:
        raise ParameterError("regions must be disjoint")
    S = tab.entropy
    return (S(A) + S(B) + S(C) - S(A | B) - S(A | C) - S(B | C) + S(A | B | C))


def quarters(L: int) -> tuple[range, range, range]:
    """Regions A, B, C: the first three of four equal contiguous quarters."""
    if L % 4:
        raise ParameterError("quarter regions need L divisible by 4")
    q = L // 4
    return range(0, q), range(q, 2 * q), range(2 * q, 3 * q)


def delta_s_measurement(tab: Tableau, A, x: int) -> int:
    """Drop in S_A from a Z measurement at site ``x``; ``tab`` is left untouched."""
    A = set(A)
    if x not in A:
        raise ParameterError("measured site must lie inside A")
    before = tab.entropy(A)
    t2 = tab.copy()
    t2.measure_site(x, "Z", outcome=None, rng=np.random.default_rng(0))
    return before - t2.entropy(A)
