import numpy as np
import pytest

from helpers import example1_model, implicit_network_solve, load, markov, rat
from netident.model import ValidationError, build_model, instantiate, network_transfer, sample_valid_model
from netident.rational import Rat
from netident.simulator import (
    SignalRecord,
    SimulationDivergedError,
    estimate_noise_feedthrough,
    null_direction,
    null_witness_family,
    rat_to_filter,
    simulate,
    witness_family_S2,
)
from netident.spectral import noise_feedthrough_spectrum, psd_rank

A, B = rat([1], [0, 1]), rat([2], [0, 1])


def closed_loop():
    doc = load("closedloop.json")
    return doc.structure, instantiate(doc.structure, doc.theta)


def test_rat_to_filter_matches_markov():
    r = rat([1, "1/2"], ["-1/4", 1])
    b, a = rat_to_filter(r)
    from scipy.signal import lfilter
    imp = np.zeros(12)
    imp[0] = 1
    assert np.allclose(lfilter(b, a, imp), markov(r, 12))
    with pytest.raises(ValueError):
        rat_to_filter(rat([0, 1]))


def test_impulse_response_example():
    r = np.zeros((2, 6))
    r[0, 0] = 1
    rec = simulate(example1_model(A, B, 1), r)
    assert np.allclose(rec.w[2], [1, 0, 2, 0, 0, 0])
    assert np.allclose(rec.w[1], [0, 1, 0, 0, 0, 0])


def test_closed_loop_step_matches_implicit_solve():
    _, m = closed_loop()
    N = 40
    r = np.ones((1, N))
    e = np.random.default_rng(0).normal(size=(1, N))
    rec = simulate(m, r, e)
    assert np.abs(rec.w - implicit_network_solve(m, r, e)).max() < 1e-10


def test_superposition():
    _, m = closed_loop()
    rng = np.random.default_rng(1)
    r1, r2 = rng.normal(size=(2, 1, 50))
    e1, e2 = rng.normal(size=(2, 1, 50))
    w = simulate(m, r1 + 2 * r2, e1 + 2 * e2).w
    assert np.allclose(w, simulate(m, r1, e1).w + 2 * simulate(m, r2, e2).w)


def test_seeded_noise_is_reproducible_and_burn_in():
    _, m = closed_loop()
    a = simulate(m, N=30, seed=3)
    b = simulate(m, N=30, seed=3)
    assert np.array_equal(a.w, b.w) and a.e.std() > 0
    c = simulate(m, N=30, seed=3, burn_in=10)
    assert c.N == 30 and not np.array_equal(a.w, c.w)


def test_zero_noise_dimension():
    rec = simulate(example1_model(A, B, 1), N=8, seed=0)
    assert rec.e.shape == (0, 8) and not rec.w.any()


def test_csv_round_trip():
    _, m = closed_loop()
    rec = simulate(m, np.ones((1, 20)), N=20, seed=2)
    text = rec.to_csv()
    assert text.splitlines()[0] == "t,r1,e1,w1,w2"
    back = SignalRecord.from_csv(text)
    assert np.array_equal(back.w, rec.w) and np.array_equal(back.r, rec.r) and np.array_equal(back.e, rec.e)
    with pytest.raises(ValueError):
        SignalRecord.from_csv("x,y\n1,2\n")


def test_divergence_guard():
    m = build_model([[0, rat([2], [0, 1])], [rat([2], [0, 1]), 0]], [[1], [0]])
    r = np.zeros((1, 200))
    r[0, 0] = 1
    with pytest.raises(SimulationDivergedError):
        simulate(m, r)


def test_shape_errors():
    _, m = closed_loop()
    with pytest.raises(ValueError):
        simulate(m, np.ones((2, 5)))
    with pytest.raises(ValueError):
        simulate(m)


# --- witnesses -------------------------------------------------------------------------

def test_s2_family():
    s2 = example1_model(A, B, 2)
    T = network_transfer(s2)
    same = witness_family_S2(s2, B)
    assert same.G[1, 0].is_zero() and same == s2
    for g23 in (Rat.zero(), rat([1], ["1/3", 1])):
        member = witness_family_S2(s2, g23)
        assert network_transfer(member) == T
        assert member.G[1, 0] == (A + Rat.one()) * (B - g23)
    with pytest.raises(ValidationError):
        witness_family_S2(s2, rat([1], [-3, 1]))


def test_null_witness_family_shares_transfer():
    from helpers import example1_structure
    s = example1_structure()
    m = example1_model(A, B, 2)
    X = null_direction(s, m, 1)
    assert X is not None and all(x.is_strictly_proper() for x in X)
    assert null_direction(s, m, 0) is None
    T = network_transfer(m)
    members = null_witness_family(s, m, 1)
    assert len(members) == 5
    for mem in members:
        assert network_transfer(mem.model) == T
        assert mem.model != m
    with pytest.raises(ValueError):
        null_witness_family(s, m, 0)


# --- noise feedthrough estimate -------------------------------------------------------------

def test_estimate_matches_diagonal_lambda():
    z1 = rat([1], [0, 1])
    m = build_model([[0, z1 * Rat.const("1/2")], [0, 0]], [[]] * 2,
                    [[1, 0], [rat([1], ["1/2", 1]), 1]], np.diag([1.0, 4.0]))
    est = estimate_noise_feedthrough(m, N=100_000, seed=0)
    assert np.allclose(est, np.diag([1, 4]), rtol=0.05, atol=0.05)


def test_estimate_closed_loop_and_five_node():
    _, m = closed_loop()
    est = estimate_noise_feedthrough(m, N=20_000, seed=1)
    assert np.allclose(est, noise_feedthrough_spectrum(m).Phi, rtol=0.05, atol=0.01)
    s = load("fivenode.json").structure
    m5 = sample_valid_model(s, np.random.default_rng(0))
    est = estimate_noise_feedthrough(m5, N=4096, seed=2)
    assert psd_rank(est) == 3 and not est[3:].any()


def test_estimate_edge_cases():
    m = example1_model(A, B, 1)
    assert not estimate_noise_feedthrough(m, N=2048).any()
    _, cl = closed_loop()
    with pytest.raises(ValueError):
        estimate_noise_feedthrough(cl, N=1000)
