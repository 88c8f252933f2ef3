"""Dense-network substrate: forward/backward correctness and Adam behavior."""

from __future__ import annotations

import numpy as np
import pytest

from latinv.errors import InputError, NumericalError
from latinv.nn import (
    AdamState,
    Mlp,
    finite_difference_grads,
    gradient_check,
    max_relative_error,
    optimizer_step,
)


def make_net(
    sizes: tuple[int, ...] = (3, 5, 2),
    seed: int = 0,
    output_activation: str = "identity",
    a_max: float = 1.0,
) -> Mlp:
    net = Mlp.create(sizes, np.random.default_rng(seed), output_activation=output_activation, a_max=a_max)
    # Generic evaluation points: zero biases would leave relu units on the kink.
    rng = np.random.default_rng(seed + 1)
    for b in net.biases:
        b[:] = rng.uniform(-0.5, 0.5, size=b.shape)
    return net


# -- forward -----------------------------------------------------------------


def test_forward_matches_manual_two_layer_computation() -> None:
    net = Mlp(
        (2, 2, 1),
        [np.array([[1.0, -1.0], [0.5, 2.0]]), np.array([[1.0], [-2.0]])],
        [np.array([0.1, -0.3]), np.array([0.2])],
    )
    x = np.array([1.0, 2.0])
    h = np.maximum(x @ net.weights[0] + net.biases[0], 0.0)
    expected = h @ net.weights[1] + net.biases[1]
    assert net.forward(x) == pytest.approx(expected)


def test_forward_batch_rows_match_single_calls() -> None:
    net = make_net((4, 6, 3), seed=3)
    xs = np.random.default_rng(9).standard_normal((5, 4))
    batched = net.forward(xs)
    assert batched.shape == (5, 3)
    # gemm vs gemv may sum in different orders, so allow last-bit slack.
    for i in range(5):
        np.testing.assert_allclose(batched[i], net.forward(xs[i]), rtol=1e-13, atol=1e-15)


def test_tanh_output_is_bounded_by_a_max() -> None:
    net = make_net((3, 8, 2), seed=1, output_activation="tanh", a_max=0.5)
    xs = np.random.default_rng(2).standard_normal((64, 3)) * 10.0
    out = net.forward(xs)
    assert np.all(np.abs(out) <= 0.5)


def test_forward_trace_holds_input_and_every_activation() -> None:
    net = make_net((3, 5, 4, 2), seed=7)
    x = np.random.default_rng(0).standard_normal(3)
    out, trace = net.forward_trace(x)
    assert len(trace) == 4
    np.testing.assert_array_equal(trace[0][0], x)
    np.testing.assert_array_equal(trace[-1][0], out)
    assert np.all(trace[1] >= 0.0)


def test_create_weights_respect_fan_in_bound_and_biases_start_zero() -> None:
    net = Mlp.create((100, 50, 10), np.random.default_rng(5))
    assert np.all(np.abs(net.weights[0]) <= 1.0 / np.sqrt(100))
    assert np.all(np.abs(net.weights[1]) <= 1.0 / np.sqrt(50))
    assert np.all(net.biases[0] == 0.0)
    assert np.all(net.biases[1] == 0.0)


def test_input_width_mismatch_is_rejected() -> None:
    net = make_net((3, 4, 2))
    with pytest.raises(InputError):
        net.forward(np.zeros(5))


# -- backward ----------------------------------------------------------------


def test_backward_matches_finite_differences_across_seeded_shapes() -> None:
    rng = np.random.default_rng(42)
    for trial in range(10):
        depth = int(rng.integers(1, 4))
        sizes = tuple(int(rng.integers(1, 7)) for _ in range(depth + 2))
        act = "tanh" if trial % 2 else "identity"
        net = Mlp.create(sizes, rng, output_activation=act, a_max=2.0)
        for b in net.biases:
            b[:] = rng.uniform(-0.5, 0.5, size=b.shape)
        x = rng.standard_normal(sizes[0])
        upstream = rng.standard_normal(sizes[-1])
        analytic, _ = net.backward(x, upstream)
        numeric = finite_difference_grads(net, x, upstream)
        assert max_relative_error(analytic, numeric) <= 1e-4


def test_backward_input_gradient_matches_finite_differences() -> None:
    net = make_net((4, 6, 3), seed=11)
    rng = np.random.default_rng(12)
    x = rng.standard_normal(4)
    upstream = rng.standard_normal(3)
    _, din = net.backward(x, upstream)
    step = 1e-6
    for j in range(4):
        bumped = x.copy()
        bumped[j] += step
        hi = float(np.sum(net.forward(bumped) * upstream))
        bumped[j] -= 2 * step
        lo = float(np.sum(net.forward(bumped) * upstream))
        assert din[j] == pytest.approx((hi - lo) / (2 * step), rel=1e-5, abs=1e-8)


def test_backward_batch_gradients_are_sums_over_rows() -> None:
    net = make_net((3, 5, 2), seed=4)
    rng = np.random.default_rng(6)
    xs = rng.standard_normal((4, 3))
    ups = rng.standard_normal((4, 2))
    batch_grads, batch_din = net.backward(xs, ups)
    summed = [np.zeros_like(p) for p in net.parameters()]
    for i in range(4):
        grads, din = net.backward(xs[i], ups[i])
        for acc, g in zip(summed, grads):
            acc += g
        np.testing.assert_allclose(batch_din[i], din, rtol=1e-12, atol=1e-12)
    for got, want in zip(batch_grads, summed):
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)


def test_backward_from_trace_reuses_forward_activations() -> None:
    net = make_net((3, 4, 2), seed=8)
    rng = np.random.default_rng(9)
    x = rng.standard_normal((5, 3))
    upstream = rng.standard_normal((5, 2))
    _, trace = net.forward_trace(x)
    grads_trace, din_trace = net.backward_from_trace(trace, upstream)
    grads_direct, din_direct = net.backward(x, upstream)
    for a, b in zip(grads_trace, grads_direct):
        np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(din_trace, din_direct)


def test_backward_rejects_mismatched_upstream_batch() -> None:
    net = make_net((3, 4, 2))
    _, trace = net.forward_trace(np.zeros((5, 3)))
    with pytest.raises(InputError):
        net.backward_from_trace(trace, np.zeros((4, 2)))


# -- gradient check harness --------------------------------------------------


def test_gradient_check_passes_at_tolerance_over_twenty_nets() -> None:
    result = gradient_check(trials=20, seed=0)
    assert result.worst <= 1e-4
    assert result.trial >= 0


def test_gradient_check_flags_a_corrupted_layer_gradient() -> None:
    result = gradient_check(trials=20, seed=0, corrupt_layer=0)
    assert result.worst > 1e-4


def test_gradient_check_result_formats_location() -> None:
    result = gradient_check(trials=3, seed=1)
    text = str(result)
    assert "max relative error" in text
    assert "parameter block" in text


# -- Adam --------------------------------------------------------------------


def test_optimizer_zero_gradient_leaves_parameters_untouched() -> None:
    net = make_net((3, 4, 2), seed=0)
    params = net.parameters()
    before = [p.copy() for p in params]
    state = AdamState.for_parameters(params)
    optimizer_step(params, [np.zeros_like(p) for p in params], state)
    for p, b in zip(params, before):
        np.testing.assert_array_equal(p, b)
    assert state.step == 1


def test_optimizer_first_step_on_quadratic_moves_by_almost_lr() -> None:
    # f(w) = w^2 at w=1: m-hat = 2, v-hat = 4, so the step is lr * 2/(2 + eps).
    w = [np.array([1.0])]
    state = AdamState.for_parameters(w, lr=1e-3)
    optimizer_step(w, [np.array([2.0])], state)
    assert float(w[0][0]) == 1.0 - 0.0009999999950000005


def test_optimizer_hundred_quadratic_steps_reach_frozen_value() -> None:
    # Scalar descent on f(w) = w^2 from w=1 with lr 1e-3. The independently
    # computed endpoint is frozen here; bit drift means the update rule changed.
    w = [np.array([1.0])]
    state = AdamState.for_parameters(w, lr=1e-3)
    prev = 1.0
    for _ in range(100):
        optimizer_step(w, [np.array([2.0 * w[0][0]])], state)
        cur = float(w[0][0])
        assert cur < prev
        prev = cur
    assert float(w[0][0]) == 0.901743598078609


def test_optimizer_rejects_non_finite_gradients() -> None:
    w = [np.array([1.0])]
    state = AdamState.for_parameters(w)
    with pytest.raises(NumericalError):
        optimizer_step(w, [np.array([np.nan])], state)
    with pytest.raises(NumericalError):
        optimizer_step(w, [np.array([np.inf])], state)


def test_optimizer_rejects_shape_mismatch() -> None:
    w = [np.zeros((2, 2))]
    state = AdamState.for_parameters(w)
    with pytest.raises(InputError):
        optimizer_step(w, [np.zeros(3)], state)


def test_optimizer_updates_decouple_across_parameter_blocks() -> None:
    a = np.array([1.0, 1.0])
    b = np.array([1.0])
    state = AdamState.for_parameters([a, b], lr=1e-2)
    optimizer_step([a, b], [np.array([1.0, -1.0]), np.array([0.0])], state)
    assert a[0] < 1.0 < a[1]
    assert b[0] == 1.0
