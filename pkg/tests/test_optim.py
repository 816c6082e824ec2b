import numpy as np
import pytest

from hingefnn import FnnArchitecture, FnnModel, GradientSet, InitSpec, init_model, init_optimizer, optimizer_step
from hingefnn.optim import Variant


def scalar_model(w=1.0):
    # every entry starts at w, so entry [0, 0] behaves like a scalar weight
    a = FnnArchitecture(2, 1)
    return FnnModel(a, [np.array([[w], [w]]), np.array([[w, w]])])


def grads_like(model, value):
    return GradientSet(tuple(np.full(W.shape, value) for W in model.weights), 1, 0.0)


@pytest.mark.parametrize(
    "variant, hyper, expected",
    [
        ("sgd", {}, 0.98),
        ("momentum", {"momentum": 0.9}, 0.98),
        ("rmsprop", {"rho": 0.9, "delta": 1e-6}, 1 - 0.1 * 0.2 / np.sqrt(0.004001)),
    ],
)
def test_single_step_examples(variant, hyper, expected):
    m = scalar_model()
    st = init_optimizer(variant, m, learning_rate=0.1, **hyper)
    m2, st2 = optimizer_step(st, grads_like(m, 0.2), m)
    assert m2.weights[0][0, 0] == pytest.approx(expected, abs=1e-12)
    if variant == "momentum":
        assert st2.velocities[0][0, 0] == pytest.approx(-0.02, abs=1e-15)
    if variant == "rmsprop":
        assert st2.accumulators[0][0, 0] == pytest.approx(0.004, abs=1e-15)
        assert m2.weights[0][0, 0] == pytest.approx(0.683812, abs=1e-6)
    # inputs are untouched
    assert m.weights[0][0, 0] == 1.0 and st.step_count == 0


@pytest.mark.parametrize("variant", list(Variant))
def test_zero_gradient_is_a_fixed_point(variant):
    m = init_model(FnnArchitecture(3, 2), InitSpec(seed=1))
    st = init_optimizer(variant, m)
    cur = m
    for _ in range(5):
        cur, st = optimizer_step(st, grads_like(m, 0.0), cur)
    assert cur.same_weights(m)
    for buf in (st.velocities, st.accumulators, st.first_moments, st.second_moments):
        assert all(np.all(b == 0) for b in buf)


def test_adam_counter_and_defaults():
    m = scalar_model()
    st = init_optimizer("adam", m)
    assert (st.learning_rate, st.rho1, st.rho2, st.delta, st.step_count) == (0.01, 0.9, 0.999, 1e-8, 0)
    _, st = optimizer_step(st, grads_like(m, 0.5), m)
    assert st.step_count == 1
    assert init_optimizer("rmsprop", m).delta == 1e-6


def test_shape_and_finiteness_errors():
    m = scalar_model()
    st = init_optimizer("adam", m)
    with pytest.raises(ValueError):
        optimizer_step(st, [np.zeros((2, 1))], m)
    with pytest.raises(ValueError):
        optimizer_step(st, grads_like(m, np.nan), m)
    other = init_model(FnnArchitecture(3, 2), InitSpec(seed=0))
    with pytest.raises(ValueError):
        optimizer_step(st, grads_like(other, 0.1), other)


def test_bad_hyperparameters():
    m = scalar_model()
    for kw in [dict(learning_rate=0.0), dict(momentum=1.0)]:
        with pytest.raises(ValueError):
            init_optimizer("momentum", m, **kw)
    with pytest.raises(TypeError):
        init_optimizer("sgd", m, beta=0.3)
