import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import fd_gradient, random_instance, rel_error, scalar_forward
from orderlab.layer import (
    ContractError,
    LayerParams,
    LayerShape,
    backward,
    forward,
    forward_rnn_form,
)
from orderlab.numerics import DimensionError, make_rng, randn, sigmoid


def test_shape_invariants():
    with pytest.raises(ValueError):
        LayerShape(0, 1, 1, 1)
    with pytest.raises(ValueError):
        LayerShape(1, -1, 1, 1)
    with pytest.raises(ValueError):
        LayerShape(1, 1, 1, 0)
    s = LayerShape(1, 0, 1, 1)
    assert s.w_shape == (1, 2)


def test_zero_weights_give_half():
    shape = LayerShape(2, 3, 2, 1)
    params = LayerParams(np.zeros(shape.w_shape), np.ones(shape.n))
    y, _ = forward(shape, params, np.random.default_rng(0).random((5, 2)))
    assert np.all(y == 0.5)


@pytest.mark.parametrize("T", [1, 2, 5])
def test_single_output_closed_form(T):
    # no self weight: the state never feeds back, so every step gives sigma(w x)
    shape = LayerShape(1, 0, 1, T)
    w = 1.7
    params = LayerParams(np.array([[0.0, w]]), np.array([0.3]))
    x = np.array([[-1.0], [0.0], [2.0]])
    y, _ = forward(shape, params, x)
    assert np.allclose(y, 1.0 / (1.0 + np.exp(-w * x)), atol=1e-15, rtol=0)


@pytest.mark.parametrize("seed", range(5))
def test_forward_matches_scalar_reference(seed):
    shape = LayerShape(1, 5, 2, 3)
    params, x, _ = random_instance(shape, seed, batch=4, bias=seed % 2 == 0)
    params.mask[:] = 1.0
    y, trace = forward(shape, params, x, trace=True)
    ref = scalar_forward(shape, params.W.tolist(), params.v.tolist(), None if params.b is None else params.b.tolist(), x)
    assert np.max(np.abs(y - ref)) < 1e-12
    assert len(trace.states) == shape.T + 1
    assert np.array_equal(trace.states[0], np.repeat(params.v[None], 4, axis=0))
    for s in trace.states[1:]:
        assert np.all((s > 0) & (s < 1))


def test_forward_rejects_bad_input():
    shape = LayerShape(1, 2, 2, 2)
    params, _, _ = random_instance(shape, 0)
    with pytest.raises(DimensionError):
        forward(shape, params, np.ones((3, 3)))
    with pytest.raises(DimensionError):
        forward(shape, params, np.ones((0, 2)))
    bad = LayerParams(np.ones((3, 4)), np.ones(2))
    with pytest.raises(DimensionError):
        forward(shape, bad, np.ones((1, 2)))


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 3), st.integers(0, 6), st.integers(1, 3), st.integers(1, 6), st.integers(0, 10**6), st.booleans()
)
def test_rnn_form_equivalence(o, h, i, T, seed, bias):
    shape = LayerShape(o, h, i, T)
    params, x, _ = random_instance(shape, seed, bias=bias, mask_p=0.2)
    y, _ = forward(shape, params, x)
    assert np.max(np.abs(y - forward_rnn_form(shape, params, x))) < 1e-12


def test_rnn_form_without_input_pathway_ignores_x():
    shape = LayerShape(1, 3, 2, 4)
    params, x, _ = random_instance(shape, 1)
    params.W[:, shape.n :] = 0.0
    y1 = forward_rnn_form(shape, params, x)
    y2 = forward_rnn_form(shape, params, x * 10 + 3)
    assert np.array_equal(y1, y2)


def test_rnn_form_without_recurrence_is_constant_after_first_step():
    shape = LayerShape(1, 3, 2, 4)
    params, x, _ = random_instance(shape, 2)
    params.W[:, : shape.n] = 0.0
    _, trace = forward(shape, params, x, trace=True)
    expected = sigmoid(x @ params.W[:, shape.n :].T + params.b)
    for s in trace.states[1:]:
        assert np.allclose(s, expected, atol=1e-15)


def test_zero_grad_output_gives_zero_gradients():
    shape = LayerShape(1, 3, 2, 3)
    params, x, _ = random_instance(shape, 0)
    _, trace = forward(shape, params, x, trace=True)
    dW, dv, db = backward(shape, params, trace, np.zeros((x.shape[0], 1)))
    assert not dW.any() and not dv.any() and not db.any()


def test_logistic_regression_gradient():
    # T=1, o=1, h=0: y = sigma(w_s v + w_x . x), dy/dw_x = sigma' x
    shape = LayerShape(1, 0, 2, 1)
    W = np.array([[0.4, -0.7, 1.1]])
    v = np.array([0.25])
    params = LayerParams(W, v)
    x = np.array([[0.5, 2.0], [1.5, -1.0]])
    g = np.array([[1.0], [-0.5]])
    y, trace = forward(shape, params, x, trace=True)
    dW, dv, _ = backward(shape, params, trace, g)
    z = 0.4 * 0.25 + x @ np.array([-0.7, 1.1])
    sp = sigmoid(z) * (1 - sigmoid(z))
    expected_x = (g[:, 0] * sp) @ x
    expected_s = float((g[:, 0] * sp).sum() * 0.25)
    assert np.allclose(dW[0, 1:], expected_x, atol=1e-15)
    assert dW[0, 0] == pytest.approx(expected_s, abs=1e-15)
    assert dv[0] == pytest.approx(float((g[:, 0] * sp).sum() * 0.4), abs=1e-15)


@pytest.mark.parametrize("seed", range(3))
def test_gradients_match_finite_differences(seed):
    shape = LayerShape(1, 3, 2, 3)
    params, x, g = random_instance(shape, seed, bias=True)
    _, trace = forward(shape, params, x, trace=True)
    dW, dv, db = backward(shape, params, trace, g)
    for r in range(shape.n):
        for c in range(shape.w_shape[1]):
            assert rel_error(dW[r, c], fd_gradient(shape, params, x, g, "W", (r, c))) < 1e-5
        assert rel_error(dv[r], fd_gradient(shape, params, x, g, "v", r)) < 1e-5
        assert rel_error(db[r], fd_gradient(shape, params, x, g, "b", r)) < 1e-5


def test_masked_weights_have_no_influence():
    shape = LayerShape(1, 4, 2, 3)
    params, x, g = random_instance(shape, 4, mask_p=0.5)
    _, trace = forward(shape, params, x, trace=True)
    dW, _, _ = backward(shape, params, trace, g)
    masked = np.argwhere(params.mask == 0)
    assert len(masked) > 0
    for r, c in masked:
        assert dW[r, c] == 0.0
        assert fd_gradient(shape, params, x, g, "W", (r, c)) == 0.0


def test_backward_contract_errors():
    shape = LayerShape(1, 2, 2, 3)
    params, x, g = random_instance(shape, 0)
    _, trace = forward(shape, params, x, trace=True)
    with pytest.raises(ContractError):
        backward(LayerShape(1, 2, 2, 2), params, trace, g)
    with pytest.raises(ContractError):
        backward(shape, params, trace, np.zeros((x.shape[0] + 1, 1)))
    with pytest.raises(ContractError):
        backward(shape, params, None, g)


def test_identity_activation_is_linear_recurrence():
    shape = LayerShape(1, 1, 1, 2)
    W = np.array([[0.0, 2.0, 1.0], [0.0, 0.0, 3.0]])
    params = LayerParams(W, np.array([0.0, 0.0]))
    y, _ = forward(shape, params, np.array([[1.0]]), activation="identity")
    # step 1: s = (1, 3); step 2: out = 2 * 3 + 1 = 7
    assert y[0, 0] == 7.0


def test_forward_is_pure():
    shape = LayerShape(1, 3, 2, 3)
    params = LayerParams(randn(make_rng(0), *shape.w_shape), np.zeros(shape.n))
    before = params.W.copy()
    forward(shape, params, np.ones((2, 2)))
    assert np.array_equal(before, params.W)
