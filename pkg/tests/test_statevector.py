import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from circuitlab.core import gates as G
from circuitlab.core.circuit import Circuit, GateEvent, build_brickwork, place_measurements
from circuitlab.errors import CapExceededError, NumericalDegeneracyError, ParameterError
from circuitlab.statevector.operators import (floquet_unitary, heisenberg_evolve, otoc, pauli_weights, sff,
                                              two_point_value)
from circuitlab.statevector.state import (apply_gate, entropy_value, haar_purity, init_product, measure,
                                          mutual_information, purity, random_state, run_circuit, schmidt_spectrum)

LN2 = np.log(2)


def _svd_entropy(amps, L, k, n="vn"):
    """Entropy of the first k sites straight from an SVD (independent path)."""
    s = np.linalg.svd(amps.reshape(2**k, 2 ** (L - k)), compute_uv=False) ** 2
    s = s[s > 1e-300]
    return -np.sum(s * np.log(s)) if n == "vn" else np.log(np.sum(s**n)) / (1 - n)


def test_bell_pair_entropy():
    psi = init_product(2)
    apply_gate(psi, G.H, (0,))
    apply_gate(psi, G.CNOT, (0, 1))
    assert entropy_value(psi, [0]) == pytest.approx(LN2, abs=1e-14)
    assert entropy_value(psi, [1], n=2) == pytest.approx(LN2, abs=1e-14)
    assert mutual_information(psi, [0], [1]) == pytest.approx(2 * LN2, abs=1e-13)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 5), st.sampled_from(["vn", 2, 3]))
def test_entropy_matches_svd_oracle(seed, k, n):
    L = 6
    psi = random_state(L, 2, np.random.default_rng(seed))
    assert entropy_value(psi, range(k), n) == pytest.approx(_svd_entropy(psi.amps, L, k, n), abs=1e-10)
    # complementary regions carry equal entropy in a pure state
    assert entropy_value(psi, range(k), n) == pytest.approx(entropy_value(psi, range(k, L), n), abs=1e-10)


def test_spectrum_normalized(rng):
    psi = random_state(5, 2, rng)
    lam = schmidt_spectrum(psi, [0, 3])
    assert lam.sum() == pytest.approx(1.0, abs=1e-12)
    assert purity(psi, [0, 3]) == pytest.approx(np.sum(lam**2), abs=1e-12)


def test_gates_preserve_norm_and_validate(rng):
    c = build_brickwork(7, 6, "open", "haar", rng)
    psi, _ = run_circuit(init_product(7), c, rng)
    assert psi.norm2() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ParameterError):
        apply_gate(psi, G.CZ, (2, 2))


def test_measurement_born_rule(rng):
    psi = random_state(4, 2, rng)
    t = psi.tensor
    p_up = float(np.sum(np.abs(t[:, :, 0, :]) ** 2))
    out, p, post = measure(psi.copy(), 2, "Z", outcome=+1)
    assert p == pytest.approx(p_up, abs=1e-12)
    assert post.norm2() == pytest.approx(1.0)
    assert np.sum(np.abs(post.tensor[:, :, 1, :]) ** 2) < 1e-24
    # sampled frequencies follow the Born weights
    hits = sum(measure(psi.copy(), 2, "Z", rng)[0] == 1 for _ in range(4000))
    assert abs(hits / 4000 - p_up) < 4 * np.sqrt(p_up * (1 - p_up) / 4000)


def test_forced_zero_probability_outcome_raises():
    with pytest.raises(NumericalDegeneracyError):
        measure(init_product(2), 0, "Z", outcome=-1)


def test_measurement_disentangles(rng):
    c = place_measurements(build_brickwork(6, 6, "open", "haar", rng), 1.0, rng)
    psi, rec = run_circuit(init_product(6), c, rng)
    assert len(rec.outcomes) == 36
    assert entropy_value(psi, range(3)) < 1e-10


def test_haar_purity_formula():
    # Lubkin: (dA + dB) / (dA dB + 1)
    assert haar_purity(4, 8) == pytest.approx(12 / 33)
    assert -np.log(haar_purity(2**7, 2**7)) == pytest.approx(np.log(2**14 + 1) - np.log(2**8), rel=1e-12)


# -- operators ---------------------------------------------------------------

def test_heisenberg_light_cone_and_weights(rng):
    L = 6
    c = build_brickwork(L, 3, "open", "haar", rng)
    op = heisenberg_evolve(c, 2, "Z")
    assert op.norm() == pytest.approx(1.0, abs=1e-12)
    w = pauli_weights(op)
    assert w.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert w.right_endpoint.sum() == pytest.approx(1.0, abs=1e-12)
    # three layers from site 2 reach at most sites 0..5 but strictly inside the cone here
    lo, hi = 2 - 3, 2 + 3
    for label, v in w.as_dict().items():
        support = [i for i, ch in enumerate(label) if ch != "I"]
        assert min(support) >= max(lo, 0) and max(support) <= min(hi, L - 1)


def test_otoc_outside_cone_vanishes(rng):
    c = build_brickwork(8, 2, "open", "haar", rng)
    assert otoc(c, 7, 2, ref=0) == pytest.approx(0.0, abs=1e-12)
    assert otoc(c, 3, 0, ref=3) == pytest.approx(0.0, abs=1e-12)


def test_otoc_equals_pauli_weight_oracle(rng):
    """For a Z reference operator the OTOC is sum over strings that anticommute
    with Z_ref of 2 a_S^2."""
    L, ref = 5, 1
    c = build_brickwork(L, 3, "open", "haar", rng)
    w = pauli_weights(heisenberg_evolve(c, 2, "Z", 3)).as_dict()
    oracle = sum(2 * v for s, v in w.items() if s[ref] in "XY")
    assert otoc(c, 2, 3, ref=ref) == pytest.approx(oracle, abs=1e-12)


def test_two_point_swap_circuit_moves_operator():
    L = 4
    layers = tuple(tuple(GateEvent(b, G.SWAP) for b in bonds)
                   for bonds in ([(0, 1), (2, 3)], [(1, 2)], [(0, 1), (2, 3)]))
    c = Circuit(L, layers)
    # a SWAP brickwork moves site 0 along the light ray to site 3 after 3 layers
    assert two_point_value(c, 0, 3, ref=3) == pytest.approx(1.0)
    assert two_point_value(c, 0, 3, ref=2) == pytest.approx(0.0)


def test_dense_cap():
    c = build_brickwork(14, 1, "open", "haar", np.random.default_rng(1))
    with pytest.raises(CapExceededError):
        heisenberg_evolve(c, 0, cap=12)


def test_sff_fixed_unitary_and_floquet(rng):
    d = 8
    assert np.allclose(sff(np.eye(d), 3), d**2)
    c = build_brickwork(3, 2, "open", "haar", rng)
    u = floquet_unitary(c)
    assert G.is_unitary(u, 1e-10)
    psi, _ = run_circuit(init_product(3), c)
    assert np.allclose(u[:, 0], psi.amps)
    ph = np.angle(np.linalg.eigvals(u))
    assert sff(u, 4)[3] == pytest.approx(abs(np.exp(3j * ph).sum()) ** 2)
