import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from circuitlab.classical.dprm import dprm_exponents, dprm_ground_state, dprm_statistics
from circuitlab.classical.membrane import (MembraneModel, finite_region_entropy, haar_tension, hopf_lax,
                                           lightcone_tension, membrane_entropy)
from circuitlab.classical.mincut import (brute_force_cut, cut_graph, directed_cut_profile, min_cut,
                                         poisson_cut_sample, tension_extrapolate)
from circuitlab.classical.strings import (PauliString, exact_string_distribution, otoc_front,
                                          string_ensemble, string_markov_run)
from circuitlab.classical.u1 import u1_amplitude_diffusion, u1_conserved_weight
from circuitlab.core.circuit import brickwork_bonds, build_brickwork, place_measurements
from circuitlab.errors import ParameterError
from circuitlab.stabilizer.tableau import run_circuit, tableau_init
from circuitlab.statevector.operators import heisenberg_evolve, pauli_weights

LN2 = np.log(2)


# -- min cuts ----------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(3, 5), st.integers(1, 3), st.floats(0.0, 0.6))
def test_dijkstra_cut_matches_brute_force(seed, L, depth, p):
    rng = np.random.default_rng(seed)
    g = cut_graph(place_measurements(build_brickwork(L, depth, "open", None, rng), p, rng))
    for y in range(1, L):
        assert min_cut(g, y).units == brute_force_cut(g, range(y), max_edges=24)
    for a, c in ((1, L - 1), (0, 2)):
        assert min_cut(g, (a, c)).units == brute_force_cut(g, range(a, c), max_edges=24)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.0, 0.4))
def test_cut_bounds_clifford_entropy(seed, p):
    """A stabilizer state's half-line entropy never exceeds the min cut, and
    undirected cuts never exceed directed ones."""
    L, depth = 10, 8
    rng = np.random.default_rng(seed)
    c = place_measurements(build_brickwork(L, depth, "open", "clifford", rng), p, rng)
    tab, _ = run_circuit(tableau_init(L), c, rng)
    g = cut_graph(c)
    directed = directed_cut_profile(g)
    for y in range(1, L):
        und = min_cut(g, y).units
        assert tab.entropy(range(y)) <= und <= directed[y]


def test_intact_brickwork_cut_grows_linearly():
    L, t = 40, 12
    g = cut_graph(build_brickwork(L, t, "open", None))
    prof = directed_cut_profile(g)
    assert prof[L // 2] == t
    assert min_cut(g, L // 2).units == t
    assert prof[2] == 2 and prof[0] == 0


def test_poisson_cut_profile_properties(rng):
    s = poisson_cut_sample(60, [5.0, 10.0, 20.0], rng)
    assert np.all(np.diff(s.S, axis=0) >= 0)
    assert np.all(np.abs(np.diff(s.S, axis=1)) <= 1)
    assert s.S[:, 0].max() == 0 and s.S[:, -1].max() == 0
    pinned = poisson_cut_sample(60, [0.0, 4.0], rng, pin=30)
    assert np.array_equal(pinned.S[0], np.abs(np.arange(61) - 30))


def test_tension_extrapolation_recovers_intercept():
    t = np.array([128.0, 256, 512, 1024])
    mean = (0.5 + 3.0 * t ** (-2 / 3))[:, None] * np.ones((1, 3))
    E, err = tension_extrapolate(t, mean, np.full_like(mean, 1e-3))
    assert np.allclose(E, 0.5, atol=1e-12)


# -- DPRM --------------------------------------------------------------------

def _brute_force_polymer(seed, height, hw):
    rs = np.random.RandomState(seed)
    n = 2 * hw + 1
    e = np.full((height, n), np.inf)
    e[0, hw] = rs.random_sample()
    for h in range(1, height):
        for i in range(max(0, hw - h), min(n - 1, hw + h) + 1):
            e[h, i] = rs.random_sample()
    best = np.inf
    for steps in itertools.product((-1, 0, 1), repeat=height - 1):
        x = hw + np.concatenate([[0], np.cumsum(steps)])
        if np.all((x >= 0) & (x < n)):
            best = min(best, e[np.arange(height), x].sum())
    return best


@pytest.mark.parametrize("s", range(5))
def test_dprm_ground_state_brute_force(s):
    height, width = 7, 21
    seed = int(np.random.default_rng(s).integers(0, 2**31 - 1))
    gs = dprm_ground_state(width, height, np.random.default_rng(s))
    assert gs.energy == pytest.approx(_brute_force_polymer(seed, height, width // 2), abs=1e-12)
    assert np.all(np.abs(np.diff(gs.path)) <= 1) and gs.path[0] == 0


def test_dprm_constant_disorder_and_stats(rng):
    gs = dprm_ground_state(41, 20, rng, law="constant")
    assert gs.energy == pytest.approx(10.0)
    st_ = dprm_statistics([16, 32, 64, 128], 200, rng)
    assert np.all(np.diff(st_.energy_std) > 0)
    e = dprm_exponents(st_)
    assert 0.15 < e.beta < 0.5 and 0.4 < e.zeta < 0.9
    with pytest.raises(ParameterError):
        dprm_ground_state(11, 5, rng, law="cauchy")


# -- Pauli-string chain -------------------------------------------------------

def test_exact_distribution_normalized_and_light_cone():
    d = exact_string_distribution(6, 3, 2)
    assert sum(d.values()) == pytest.approx(1.0, abs=1e-12)
    assert "IIIIII" not in d
    # two layers from site 2 stay on sites 1..4
    d2 = exact_string_distribution(6, 2, 2)
    assert all(s[0] == "I" and s[5] == "I" for s in d2)
    assert max(d2.values()) < 1


def test_markov_chain_matches_exact_distribution():
    L, depth, n = 4, 3, 20000
    exact = exact_string_distribution(L, depth, 1)
    rng = np.random.default_rng(3)
    counts = {}
    for _ in range(n):
        lab = string_markov_run(L, depth, rng, PauliString.single(L, 1)).final.label
        counts[lab] = counts.get(lab, 0) + 1
    for lab, p in exact.items():
        f = counts.get(lab, 0) / n
        assert abs(f - p) < 5 * np.sqrt(p * (1 - p) / n) + 1e-4
    assert set(counts) <= set(exact)


def test_chain_matches_haar_averaged_operator_weights():
    """Average of a_S^2 over Haar brickwork circuits equals the chain's law."""
    L, depth, site, n = 4, 3, 1, 1500
    rng = np.random.default_rng(11)
    acc = np.zeros(4**L)
    sq = np.zeros(4**L)
    for _ in range(n):
        w = pauli_weights(heisenberg_evolve(build_brickwork(L, depth, "open", "haar", rng), site)).weights
        acc += w
        sq += w**2
    mean = acc / n
    se = np.sqrt(np.maximum(sq / n - mean**2, 0) / n)
    exact = exact_string_distribution(L, depth, site)
    idx = {lab: int("".join(str("IZXY".index(c)) for c in lab), 4) for lab in exact}
    for lab, p in exact.items():
        assert abs(mean[idx[lab]] - p) < 5 * se[idx[lab]] + 1e-3


def test_string_front_basics(rng):
    run = string_markov_run(40, 10, rng)
    assert np.all(run.right - 20 <= np.arange(1, 11) + 1)
    ens = string_ensemble(300, 128, 50, rng, record_every=4)
    f = otoc_front(ens, (16, 128))
    assert 0.5 < f.v_B < 0.7
    assert 0.7 < f.interior_density < 0.8
    with pytest.raises(ParameterError):
        PauliString.from_label("XQ")


# -- U(1) amplitudes ----------------------------------------------------------

def test_u1_matches_explicit_averaging_matrices():
    L, t = 12, 7
    s = u1_amplitude_diffusion(L, t, x0=5)
    a = np.zeros(L)
    a[5] = 1
    for tau in range(1, t + 1):
        M = np.eye(L)
        for i, j in brickwork_bonds(L, tau, "open"):
            M[np.ix_([i, j], [i, j])] = 0.5
        a = M @ a
        assert np.allclose(s.at(tau), a)


def test_u1_conservation_and_weight():
    s = u1_amplitude_diffusion(301, 100)
    assert np.allclose(s.profiles.sum(axis=1), 1.0)
    w = u1_conserved_weight(s)
    assert w[0] == 1 and np.all(np.diff(w) <= 1e-15)
    assert w[-1] * 2 * np.sqrt(np.pi * 100) == pytest.approx(1.0, abs=0.02)
    with pytest.raises(ParameterError):
        s.at(1000)


# -- membrane ----------------------------------------------------------------

def test_membrane_flat_initial_state_grows_at_v_E():
    m = MembraneModel(haar_tension)
    assert m.v_E == 0.5
    assert membrane_entropy(m, 0.0, 0.0, 10.0) == pytest.approx(0.5 * LN2 * 10, abs=1e-10)


def test_membrane_matches_hopf_lax_on_step_profile():
    m = MembraneModel(haar_tension)
    S0 = lambda x: np.where(x < 0, 0.0, 2.0 * LN2)  # noqa: E731
    for y in (-3.0, 0.0, 2.5):
        assert membrane_entropy(m, S0, y, 8.0) == pytest.approx(hopf_lax(m, S0, y, 8.0), abs=2e-3)


def test_finite_region_saturates():
    m = MembraneModel(haar_tension)
    ell = 12.0
    assert finite_region_entropy(m, ell, 3.0) == pytest.approx(2 * 0.5 * LN2 * 3, abs=1e-9)
    assert finite_region_entropy(m, ell, 40.0) == pytest.approx(ell * LN2, abs=1e-6)


def test_butterfly_velocity_and_convexity():
    assert MembraneModel(haar_tension).v_B == pytest.approx(1.0, abs=1e-6)
    assert MembraneModel(lambda v: 0.3 + 0.5 * np.asarray(v) ** 2).v_B == pytest.approx(1 - np.sqrt(0.4))
    assert MembraneModel(lightcone_tension).v_E == 0.0
    with pytest.raises(ParameterError):
        MembraneModel(lambda v: np.cos(3 * np.asarray(v)))
    with pytest.raises(ParameterError):
        membrane_entropy(MembraneModel(haar_tension), 0.0, 0.0, 1.0, nv=10)
