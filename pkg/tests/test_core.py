import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from circuitlab.core import gates as G
from circuitlab.core.circuit import (Circuit, GateEvent, MeasureEvent, brickwork_bonds, build_all_to_all,
                                     build_brickwork, build_poisson_circuit, from_json, place_measurements,
                                     poisson_events, to_json)
from circuitlab.core.clifford import (SP_ORDER, clifford_from_dense, clifford_from_id, clifford_to_dense,
                                      named_clifford, pauli_matrix, sample_clifford2, symplectic_from_index,
                                      is_symplectic, index_to_vec)
from circuitlab.core.rng import derive_seed, stream
from circuitlab.errors import InvalidGeometryError, ParameterError


# -- rng ---------------------------------------------------------------------

def test_streams_replay_and_separate():
    a = stream(7, 3, "x").random(5)
    assert np.array_equal(a, stream(7, 3, "x").random(5))
    assert not np.array_equal(a, stream(7, 4, "x").random(5))
    assert not np.array_equal(a, stream(7, 3, "y").random(5))
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3) != derive_seed(1, 3, 2)


# -- unitary gates -----------------------------------------------------------

def test_haar_gate_is_unitary_and_second_moment(rng):
    us = [G.sample_haar_gate(2, rng).matrix for _ in range(4000)]
    assert max(G.unitarity_error(u) for u in us) < 1e-12
    # E|U_00|^2 = 1/d and E|U_00|^4 = 2/(d(d+1)) for Haar on U(d)
    m = np.array([abs(u[0, 0]) ** 2 for u in us])
    assert abs(m.mean() - 0.25) < 4 * m.std() / np.sqrt(m.size)
    assert abs((m**2).mean() - 2 / 20) < 4 * (m**2).std() / np.sqrt(m.size)


def test_u1_gate_preserves_charge(rng):
    for _ in range(50):
        g = G.sample_u1_gate(rng)
        assert G.is_unitary(g.matrix)
        assert G.charge_sectors_mixed(g.matrix) < 1e-14
    total_z = np.kron(G.PAULI["Z"], np.eye(2)) + np.kron(np.eye(2), G.PAULI["Z"])
    u = G.sample_u1_gate(rng).matrix
    assert np.allclose(u @ total_z, total_z @ u)


def test_dual_unitary_family(rng):
    for J in (0.0, 0.3, np.pi / 4):
        g = G.make_dual_unitary(J, rng=rng)
        assert G.is_dual_unitary(g)
    assert G.is_dual_unitary(G.SWAP)
    assert not G.is_dual_unitary(G.CNOT)
    assert not G.is_dual_unitary(G.sample_haar_gate(2, rng))


def test_spacetime_flip_is_involution(rng):
    m = G.sample_haar_gate(2, rng).matrix
    assert np.allclose(G.spacetime_flip(G.spacetime_flip(m)), m)


# -- Clifford gates ----------------------------------------------------------

def test_symplectic_count():
    assert SP_ORDER[2] == 720
    keys = {symplectic_from_index(i, 2).tobytes() for i in range(720)}
    assert len(keys) == 720
    assert all(is_symplectic(symplectic_from_index(i, 2)) for i in range(0, 720, 37))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 720 * 16 - 1), st.integers(1, 15))
def test_clifford_tableau_matches_dense_conjugation(gid, p):
    g = clifford_from_id(gid)
    u = clifford_to_dense(g)
    assert G.is_unitary(u, 1e-10)
    v = index_to_vec(p, 2)
    sign, w = g.conjugate(v)
    assert np.allclose(u @ pauli_matrix(v) @ u.conj().T, sign * pauli_matrix(w), atol=1e-10)


def test_clifford_dense_round_trip(rng):
    for _ in range(20):
        g = sample_clifford2(rng)
        h = clifford_from_dense(clifford_to_dense(g))
        assert h.key() == g.key()
    cz = named_clifford("CZ")
    assert np.allclose(abs(np.vdot(clifford_to_dense(cz).reshape(-1), G.CZ.matrix.reshape(-1))), 4)


def test_clifford_compose_matches_matrix_product(rng):
    a, b = sample_clifford2(rng), sample_clifford2(rng)
    ab = a.compose(b)
    m = clifford_to_dense(a) @ clifford_to_dense(b)
    ov = abs(np.vdot(clifford_to_dense(ab).reshape(-1), m.reshape(-1)))
    assert abs(ov - 4) < 1e-9


# -- circuits ----------------------------------------------------------------

def test_brickwork_bond_pattern():
    assert brickwork_bonds(6, 1) == [(0, 1), (2, 3), (4, 5)]
    assert brickwork_bonds(6, 2) == [(1, 2), (3, 4)]
    assert brickwork_bonds(6, 2, "periodic") == [(1, 2), (3, 4), (5, 0)]
    c = build_brickwork(8, 5, "open", "haar", np.random.default_rng(0))
    assert c.depth == 5 and c.n_gates == 4 + 3 + 4 + 3 + 4
    with pytest.raises(InvalidGeometryError):
        build_brickwork(7, 2, "periodic")


def test_layer_validation():
    with pytest.raises(InvalidGeometryError):
        Circuit(3, ((GateEvent((0, 1), None), MeasureEvent(1)),))
    with pytest.raises(InvalidGeometryError):
        Circuit(3, ((MeasureEvent(3),),))
    with pytest.raises(ParameterError):
        MeasureEvent(0, "W")


def test_place_measurements_limits(rng):
    c = build_brickwork(6, 4, "open", "clifford", rng)
    assert place_measurements(c, 0.0, rng) is c
    full = place_measurements(c, 1.0, rng)
    assert full.n_measurements == 6 * 4 and full.depth == 8
    with pytest.raises(ParameterError):
        place_measurements(c, 1.5, rng)


def test_poisson_event_statistics(rng):
    counts = [poisson_events(10, 50.0, 1.0, rng)[0].size for _ in range(200)]
    assert abs(np.mean(counts) - 9 * 50) < 4 * np.sqrt(9 * 50 / 200)
    t, b = poisson_events(10, 5.0, 2.0, rng)
    assert np.all(np.diff(t) >= 0) and b.max() <= 8
    c = build_poisson_circuit(10, 5.0, 1.0, rng)
    assert c.n_gates > 0 and c.geometry == "poisson"


def test_all_to_all_micro_steps(rng):
    c = build_all_to_all(8, 500, 0.3, rng)
    assert c.depth == 500
    frac = c.n_measurements / 500
    assert abs(frac - 0.3) < 4 * np.sqrt(0.21 / 500)


@pytest.mark.parametrize("spec", ["haar", "clifford", "u1", "dual-unitary"])
def test_json_round_trip(spec, rng):
    c = place_measurements(build_brickwork(6, 3, "open", spec, rng), 0.4, rng)
    text = to_json(c)
    back = from_json(text)
    assert to_json(back) == text
    assert back.depth == c.depth and back.n_measurements == c.n_measurements
