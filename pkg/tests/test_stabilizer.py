import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from circuitlab.core.circuit import build_brickwork, place_measurements
from circuitlab.core.clifford import named_clifford
from circuitlab.core.gates import PAULI
from circuitlab.errors import NumericalDegeneracyError, ParameterError
from circuitlab.stabilizer.dynamics import (measurement_only_ising, purification_run, reference_qubit_run,
                                            run_hybrid)
from circuitlab.stabilizer.tableau import (Tableau, quarters, run_circuit, tableau_init, tripartite_mi)
from circuitlab.statevector.state import entropy_value, init_product, run_circuit as sv_run

LN2 = np.log(2)


def _density(tab: Tableau) -> np.ndarray:
    """rho = 2^-L prod_g (1 + g) over the stabilizer generators."""
    d = 2**tab.L
    rho = np.eye(d, dtype=complex)
    for lab in tab.generators():
        m = np.ones((1, 1), dtype=complex)
        for ch in lab[1:]:
            m = np.kron(m, PAULI[ch] if ch != "I" else np.eye(2))
        rho = rho @ (np.eye(d) + (-1 if lab[0] == "-" else 1) * m) / 2
    return rho / np.trace(rho)


def _reduced_entropy_bits(rho, L, region):
    keep = sorted(region)
    t = rho.reshape((2,) * (2 * L))
    trace_out = [s for s in range(L) if s not in keep]
    for k, s in enumerate(sorted(trace_out, reverse=True)):
        n = t.ndim // 2
        t = np.trace(t, axis1=s, axis2=s + n)
    dA = 2 ** len(keep)
    ev = np.linalg.eigvalsh(t.reshape(dA, dA))
    ev = ev[ev > 1e-12]
    return float(-np.sum(ev * np.log2(ev)))


def test_initial_states():
    up = tableau_init(4)
    assert up.generators() == ["+ZIII", "+IZII", "+IIZI", "+IIIZ"]
    plus = tableau_init(3, "all-plus")
    assert plus.generators() == ["+XII", "+IXI", "+IIX"]
    mixed = tableau_init(3, "maximally-mixed")
    assert mixed.k == 0 and mixed.entropy([0, 1]) == 2
    glassy = tableau_init(4, "glassy", m=[1, -1, 1])
    assert glassy.generators()[1] == "-IZZI" and glassy.generators()[-1] == "+XXXX"
    for t in (up, plus, mixed, glassy):
        t.check()
    with pytest.raises(ParameterError):
        tableau_init(3, "glassy", m=[1, 2])


def test_glassy_state_has_full_spin_glass_order():
    assert tableau_init(6, "glassy", m=[1, -1, -1, 1, 1]).spin_glass() == pytest.approx(1.0)
    assert tableau_init(6, "all-plus").spin_glass() == pytest.approx(1 / 6)


def test_cz_on_plus_states():
    tab = tableau_init(2, "all-plus")
    tab.apply_clifford(named_clifford("CZ"), (0, 1))
    assert sorted(tab.generators()) == ["+XZ", "+ZX"]
    assert tab.entropy([0]) == 1
    m, rnd, _ = tab.measure_site(0, "X", outcome=+1)
    assert m == 1 and rnd
    assert tab.entropy([0]) == 0


def test_measurement_cases(rng):
    # deterministic: Z on |0>
    tab = tableau_init(3)
    m, rnd, _ = tab.measure_site(1, "Z", rng)
    assert (m, rnd) == (1, False)
    with pytest.raises(NumericalDegeneracyError):
        tab.measure_site(1, "Z", outcome=-1)
    # random on a pure state
    tab = tableau_init(3)
    outs = [tableau_init(3).measure_site(0, "X", rng)[0] for _ in range(400)]
    assert abs(np.mean(outs)) < 4 / np.sqrt(400)
    m, rnd, _ = tab.measure_site(0, "X", outcome=-1)
    assert rnd and "-XII" in tab.generators()
    # random on a mixed state: a new stabilizer is added
    mixed = tableau_init(3, "maximally-mixed")
    mixed.measure_pauli("ZZI", rng)
    assert mixed.k == 1 and mixed.entropy([0, 1, 2]) == 2
    mixed.check()


def test_snapshot_round_trip(rng):
    tab = tableau_init(70)
    run_hybrid(tab, 20, 0.1, rng, boundary="open", checkpoints=[])
    back = Tableau.from_snapshot(tab.snapshot())
    assert back.snapshot() == tab.snapshot()
    assert back.entropy(range(35)) == tab.entropy(range(35))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.0, 0.5), st.integers(2, 9))
def test_cross_engine_entropies(seed, p, L):
    rng = np.random.default_rng(seed)
    c = place_measurements(build_brickwork(L, 6, "open", "clifford", rng), p, rng)
    tab, rec = run_circuit(tableau_init(L), c, rng)
    sv, _ = sv_run(init_product(L), c, forced_outcomes=[r[3] for r in rec])
    tab.check()
    for a in range(L):
        for b in range(a + 1, L + 1):
            if b - a == L:
                continue
            assert tab.entropy(range(a, b)) * LN2 == pytest.approx(entropy_value(sv, range(a, b)), abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.0, 0.6))
def test_mixed_state_entropy_matches_density_matrix(seed, p):
    L = 5
    rng = np.random.default_rng(seed)
    tab = tableau_init(L, "maximally-mixed")
    run_hybrid(tab, 4, p, rng, boundary="open", checkpoints=[])
    rho = _density(tab)
    for region in ([0], [1, 2], [0, 3, 4], [0, 1, 2, 3, 4]):
        assert tab.entropy(region) == pytest.approx(_reduced_entropy_bits(rho, L, region), abs=1e-8)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.0, 1.0))
def test_hybrid_invariants(seed, p):
    L = 16
    rng = np.random.default_rng(seed)
    tab = tableau_init(L)
    res = run_hybrid(tab, 12, p, rng, checkpoints=[4, 8, 12], observables=("half", "k", "tmi"))
    tab.check()
    assert np.all(res.series["k"] == L)
    assert np.all((res.series["half"] >= 0) & (res.series["half"] <= L // 2))
    S = tab.entropy
    A, B = range(0, 5), range(5, 11)
    # subadditivity and Araki-Lieb
    assert S(set(A) | set(B)) <= S(A) + S(B)
    assert S(set(A) | set(B)) >= abs(S(A) - S(B))
    assert tripartite_mi(tab, *quarters(L)) == res.series["tmi"][-1]


def test_purification_limits(rng):
    r0 = purification_run(12, 0.0, 20, rng, checkpoints=[20])
    assert r0.series["purification"][-1] == 12
    r1 = purification_run(12, 1.0, 2, rng, checkpoints=[2])
    assert r1.series["purification"][-1] == 0


def test_reference_qubit_bounds(rng):
    vals = [reference_qubit_run(16, 0.2, 32, rng, checkpoints=[0, 32]).series["ancilla"] for _ in range(5)]
    for v in vals:
        assert v[0] == 1
        assert set(v) <= {0.0, 1.0}
    assert reference_qubit_run(16, 1.0, 2, rng, checkpoints=[2]).series["ancilla"][-1] == 0


def test_measurement_only_limits(rng):
    # only ZZ checks: a cat-like glassy state with chi = 1
    assert measurement_only_ising(12, 1.0, 24, rng).chi_sg == pytest.approx(1.0)
    # only X checks: product state, chi = 1/L
    assert measurement_only_ising(12, 0.0, 24, rng).chi_sg == pytest.approx(1 / 12)
