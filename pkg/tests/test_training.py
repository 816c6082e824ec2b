import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hingefnn import (
    FnnArchitecture,
    FnnModel,
    InitKind,
    InitSpec,
    apply_weight_constraint,
    backprop_batch,
    check_gradients,
    finite_diff_gradients,
    forward_batch,
    hinge_loss,
    init_model,
)
from hingefnn.rng import derive_rng
from hingefnn.training import central_differences, random_gradcheck_case


def test_hinge_examples():
    assert hinge_loss(1, 1.0) == 0.0
    assert hinge_loss(-1, 0.5) == 1.5
    assert hinge_loss(1, -2.0) == 3.0
    with pytest.raises(ValueError):
        hinge_loss(0, 1.0)


def test_backprop_hand_example(tiny_model):
    g = backprop_batch(tiny_model, [(1.0, 1)])
    np.testing.assert_array_equal(g.grads[1], [[-1.0, 0.0]])
    np.testing.assert_array_equal(g.grads[0], [[-0.5], [0.0]])
    assert g.mean_loss == 0.5 and g.batch_size == 1


def test_finite_differences_hand_example(tiny_model):
    g = finite_diff_gradients(tiny_model, [(1.0, 1)], h=1e-5)
    np.testing.assert_allclose(g.grads[1], [[-1.0, 0.0]], atol=1e-8)
    np.testing.assert_allclose(g.grads[0], [[-0.5], [0.0]], atol=1e-8)


def test_zero_loss_batch_gives_zero_gradients(tiny_model):
    batch = [(4.0, 1), (-4.0, 1), (3.0, 1)]  # Phi = 0.5|x| >= 1.5
    g = backprop_batch(tiny_model, batch)
    assert g.mean_loss == 0.0
    assert all(np.all(G == 0.0) for G in g.grads)
    fd = finite_diff_gradients(tiny_model, batch)
    assert all(np.max(np.abs(G)) <= 1e-12 for G in fd.grads)


def test_margin_exactly_one_is_inactive(tiny_model):
    g = backprop_batch(tiny_model, [(2.0, 1)])  # Phi = 1 exactly
    assert all(np.all(G == 0.0) for G in g.grads)


def test_backprop_errors(tiny_model):
    with pytest.raises(ValueError):
        backprop_batch(tiny_model, [])
    with pytest.raises(ValueError):
        backprop_batch(tiny_model, [(np.array([1.0, 2.0]), 1)])
    with pytest.raises(ValueError):
        finite_diff_gradients(tiny_model, [(1.0, 1)], h=0.0)


def test_richardson_order():
    rng = derive_rng(11, "richardson")
    model, batch = random_gradcheck_case(rng, head="tanh", max_batch=4)
    exact = backprop_batch(model, batch).grads
    e1 = max(np.max(np.abs(a - b)) for a, b in zip(central_differences(model, batch, 1e-2), exact))
    e2 = max(np.max(np.abs(a - b)) for a, b in zip(central_differences(model, batch, 5e-3), exact))
    # O(h^2): halving h cuts the error by about four (unless both are at round-off)
    assert e2 <= e1 / 3.0 or e1 < 1e-9


def test_gradient_check_random_models():
    for i in range(20):
        model, batch = random_gradcheck_case(derive_rng(5, "gc", i), head="linear" if i % 2 else "tanh")
        res = check_gradients(model, batch)
        assert res.max_rel_error <= 1e-5, (i, res)


def test_gradient_check_multi_input():
    model, batch = random_gradcheck_case(derive_rng(1, "nd"), input_dim=3)
    assert check_gradients(model, batch).max_rel_error <= 1e-5


def test_init_determinism_and_layer_streams():
    a = FnnArchitecture(4, 3)
    m1, m2 = init_model(a, InitSpec(seed=9)), init_model(a, InitSpec(seed=9))
    assert m1.same_weights(m2)
    deeper = init_model(FnnArchitecture(6, 3), InitSpec(seed=9))
    np.testing.assert_array_equal(deeper.weights[0], m1.weights[0])
    assert not init_model(a, InitSpec(seed=10)).same_weights(m1)


def test_init_variances():
    from hingefnn.init import gaussian_matrix

    he = gaussian_matrix((200, 512), InitKind.HE_NORMAL, derive_rng(0, "v"))
    lc = gaussian_matrix((200, 512), InitKind.LECUN_NORMAL, derive_rng(1, "v"))
    assert abs(he.var() / (2 / 512) - 1) < 0.05
    assert abs(lc.var() / (1 / 512) - 1) < 0.05
    assert abs(lc.var() / he.var() - 0.5) < 0.05


def test_constraint_examples():
    a = FnnArchitecture(2, 1, input_dim=2)
    W1 = np.array([[6.0, 8.0], [0.0, 0.0]])  # norms 10 and 0
    W2 = np.array([[1.8, 2.4]])  # norm 3
    out = apply_weight_constraint(FnnModel(a, [W1, W2]), 1.0, 5.0)
    assert np.linalg.norm(out.weights[0][0]) == pytest.approx(5.0, abs=1e-6)
    np.testing.assert_array_equal(out.weights[0][1], [0.0, 0.0])
    np.testing.assert_allclose(out.weights[1], W2, rtol=1e-6)
    # toolkit form with a stabiliser still lands within 1e-6
    eps = apply_weight_constraint(FnnModel(a, [W1, W2]), 1.0, 5.0, eps=1e-7)
    assert np.linalg.norm(eps.weights[0][0]) == pytest.approx(5.0, abs=1e-6)
    with pytest.raises(ValueError):
        apply_weight_constraint(out, 5.0, 1.0)


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 5), st.integers(1, 6), st.integers(0, 2**32 - 1), st.floats(1e-3, 30.0))
def test_constraint_idempotent_and_in_band(K, H, seed, scale):
    m = init_model(FnnArchitecture(K, H), InitSpec(seed=seed))
    m = m.with_weights([W * scale for W in m.weights])
    once = apply_weight_constraint(m)
    twice = apply_weight_constraint(once)
    for a, b in zip(once.weights, twice.weights):
        np.testing.assert_allclose(a, b, atol=1e-9, rtol=0)
        n = np.linalg.norm(a, axis=1)
        assert np.all((n >= 1 - 1e-6) & (n <= 5 + 1e-6))


def test_gradient_is_mean_over_batch(tiny_model):
    batch = [(1.0, 1), (-0.3, -1)]
    g = backprop_batch(tiny_model, batch)
    parts = [backprop_batch(tiny_model, [s]).grads for s in batch]
    for k in range(2):
        np.testing.assert_allclose(g.grads[k], (parts[0][k] + parts[1][k]) / 2, atol=1e-15)
    phi = forward_batch(tiny_model, [1.0, -0.3]).output
    assert g.mean_loss == pytest.approx(np.mean(np.maximum(0, 1 - np.array([1, -1]) * phi)))
