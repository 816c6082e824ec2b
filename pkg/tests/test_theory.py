import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hingefnn import (
    FnnArchitecture,
    InitSpec,
    PeDecomposition,
    closed_form_pe,
    decompose_model,
    init_model,
    lemma1_indicator,
    q_function,
    simulate_pe,
    simulate_pe_detailed,
    zero_norm_pe,
)
from hingefnn.bpsk import test_set as make_test_set


def oracle_q(x):
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def test_q_examples():
    assert q_function(0.0) == pytest.approx(0.5, abs=1e-9)
    assert round(q_function(math.sqrt(2.0)), 4) == 0.0786
    assert q_function(math.inf) == 0.0
    assert q_function(-math.inf) == 1.0
    with pytest.raises(ValueError):
        q_function(math.nan)


def test_q_against_erfc_on_working_range():
    xs = np.linspace(-8, 8, 20001)
    err = np.abs(q_function(xs) - np.array([oracle_q(x) for x in xs]))
    assert err.max() <= 1e-7


def test_q_monotone_and_symmetric():
    xs = np.linspace(-8, 8, 20001)
    q = q_function(xs)
    assert np.all(np.diff(q) <= 0)
    np.testing.assert_allclose(q + q_function(-xs), 1.0, atol=1e-12)


@given(st.floats(-8, 8))
def test_q_symmetry_property(x):
    assert abs(q_function(x) + q_function(-x) - 1.0) <= 1e-12


def test_lemma1_examples():
    assert lemma1_indicator(1, 0.0) == (1, 1)
    assert lemma1_indicator(1, 0.3) == (0, 0)
    assert lemma1_indicator(-1, 0.3) == (1, 1)
    with pytest.raises(ValueError):
        lemma1_indicator(0, 1.0)


@given(st.sampled_from([-1, 1]), st.floats(allow_nan=False))
def test_lemma1_property(label, phi):
    a, b = lemma1_indicator(label, phi)
    assert a == b


def test_closed_form_examples():
    d = PeDecomposition(3, 2.0, 1.3, 0.7, [0.0], [0.0])
    assert closed_form_pe(d) == pytest.approx(0.5, abs=1e-9)
    d = PeDecomposition(1, 2.0, 1.0, 1.0, [-1.0], [1.0])
    assert closed_form_pe(d) == pytest.approx(oracle_q(1.0), abs=1e-7)
    assert closed_form_pe(d) == pytest.approx(0.158655, abs=1e-6)
    assert 0.49 <= closed_form_pe(d.scaled(1e4)) <= 0.51


def test_closed_form_rejects_degenerate_inputs():
    with pytest.raises(ValueError):
        closed_form_pe(PeDecomposition(1, 2.0, 0.0, 1.0, [0.0], [0.0]))
    with pytest.raises(ValueError):
        PeDecomposition(1, 2.0, 1.0, 1.0, [], [0.0])
    with pytest.raises(ValueError):
        PeDecomposition(1, 2.0, -1.0, 1.0, [0.0], [0.0])


def test_simulation_matches_q1_example():
    d = PeDecomposition(1, 2.0, 1.0, 1.0, [-1.0], [1.0])
    sim = simulate_pe_detailed(d, [0.6, 0.8], [1.0, 0.0], 10**6, seed=3)
    assert abs(sim.pe - oracle_q(1.0)) <= 3 * sim.stderr


def test_simulation_with_centred_shifts():
    d = PeDecomposition(2, 1.0, 2.0, 3.0, [0.0], [0.0])
    sim = simulate_pe_detailed(d, [2.0, 0, 0, 0], [0, 3.0, 0, 0], 200_000, seed=1)
    assert abs(sim.pe - 0.5) <= 3 * sim.stderr


def test_simulation_determinism_and_checks():
    d = PeDecomposition(1, 2.0, 1.0, 1.0, [-0.5, 0.2], [0.3])
    assert simulate_pe(d, [1, 0], [0, 1], 10**4, 7) == simulate_pe(d, [1, 0], [0, 1], 10**4, 7)
    with pytest.raises(ValueError):
        simulate_pe(d, [1.0, 1.0], [0, 1], 10**4, 7)
    with pytest.raises(ValueError):
        simulate_pe(d, [1, 0], [0, 1], 100, 7)


def test_zero_norm_cases():
    ts = make_test_set(20, 1)
    arch = FnnArchitecture(4, 3)
    m = init_model(arch, InitSpec(seed=2))
    dead_first = m.with_weights([np.zeros_like(m.weights[0])] + list(m.weights[1:]))
    dead_second = m.with_weights([m.weights[0], np.zeros_like(m.weights[1])] + list(m.weights[2:]))
    assert zero_norm_pe(dead_first, ts) == 1.0
    assert zero_norm_pe(dead_second, ts) == 1.0
    with pytest.raises(ValueError):
        zero_norm_pe(m, ts)


def test_model_decomposition():
    ts = make_test_set(50, 2)
    m = init_model(FnnArchitecture(3, 4), InitSpec(seed=5))
    d = decompose_model(m, ts)
    # untrained: the last layer is still its initial value, so S = 0
    assert np.all(d.shifts == 0.0)
    trained = m.with_weights(list(m.weights[:-1]) + [m.weights[-1] + 0.3])
    d = decompose_model(trained, ts)
    phi = d.y_init + d.shifts
    from hingefnn import forward_batch

    np.testing.assert_allclose(phi, forward_batch(trained, ts.x).pre_head, rtol=1e-12, atol=1e-12)
    p1 = d.pointwise_pe()
    assert 0.0 <= p1 <= 1.0
    assert abs(d.scaled(1e6).pointwise_pe() - 0.5) < 0.01 + 0.5 * np.mean(d.norms == 0)
    i_m1 = int(np.flatnonzero((ts.labels == -1) & (d.norms > 0))[0])
    i_p1 = int(np.flatnonzero((ts.labels == 1) & (d.norms > 0))[0])
    assert 0.0 <= closed_form_pe(d.per_vector(i_m1, i_p1)) <= 1.0
    with pytest.raises(ValueError):
        d.per_vector(i_p1, i_m1)


def test_model_decomposition_needs_provenance(identity_model):
    with pytest.raises(ValueError):
        decompose_model(identity_model, make_test_set(2, 0))


@settings(max_examples=25, deadline=None)
@given(
    st.integers(1, 6),
    st.sampled_from([1.0, 2.0]),
    st.floats(0.1, 5.0),
    st.floats(0.1, 5.0),
    st.lists(st.floats(-3, 3), min_size=1, max_size=20),
    st.lists(st.floats(-3, 3), min_size=1, max_size=20),
)
def test_scaling_moves_toward_one_half(H, alpha, nm, np_, sm, sp):
    d = PeDecomposition(H, alpha, nm, np_, sm, sp)
    # every Q argument shrinks in magnitude as the norms grow
    args = [np.abs(np.asarray(sm) * d.scaled(f).gain / (nm * f)) for f in (1.0, 1e2, 1e4, 1e6)]
    assert all(np.all(b <= a) for a, b in zip(args, args[1:]))
    assert 0.49 <= closed_form_pe(d.scaled(1e4)) <= 0.51
    assert 0.499 <= closed_form_pe(d.scaled(1e6)) <= 0.501
