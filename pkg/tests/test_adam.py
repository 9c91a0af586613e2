"""Unit checks for the Adam update rule."""

import numpy as np
import pytest

from rinr.mlp import AdamState, ParameterSet, TrainConfig, adam_step


def scalar_params(value: float) -> ParameterSet:
    w = np.array([[value]], dtype=np.float32)
    b = np.array([value], dtype=np.float32)
    return ParameterSet([(w, b)])


def test_zero_gradient_leaves_parameters_unchanged():
    params = scalar_params(0.75)
    grads = scalar_params(0.0)
    state = AdamState.zeros_like(params)
    cfg = TrainConfig()
    new_params, new_state = adam_step(params, grads, state, cfg, t=1)
    assert np.array_equal(new_params.layers[0][0], params.layers[0][0])
    assert np.array_equal(new_params.layers[0][1], params.layers[0][1])
    assert np.all(new_state.m[0][0] == 0.0)
    assert np.all(new_state.v[0][1] == 0.0)


def test_first_step_matches_hand_derivation():
    # t=1, g=0.5: bias correction cancels the (1 - beta) factors exactly,
    # so m_hat = 0.5, v_hat = 0.25 and the step is lr * 0.5 / (0.5 + eps).
    params = scalar_params(1.0)
    grads = scalar_params(0.5)
    state = AdamState.zeros_like(params)
    cfg = TrainConfig(learning_rate=1e-3)
    new_params, new_state = adam_step(params, grads, state, cfg, t=1)
    expected_step = 1e-3 * 0.5 / (0.5 + 1e-8)
    assert new_params.layers[0][0][0, 0] == pytest.approx(1.0 - expected_step, rel=1e-6)
    assert new_state.m[0][0][0, 0] == pytest.approx(0.05, rel=1e-6)
    assert new_state.v[0][0][0, 0] == pytest.approx(0.001 * 0.25, rel=1e-9)


def test_step_direction_opposes_gradient():
    params = scalar_params(0.0)
    state = AdamState.zeros_like(params)
    cfg = TrainConfig(learning_rate=1e-2)
    up, _ = adam_step(params, scalar_params(3.0), state, cfg, t=1)
    down, _ = adam_step(params, scalar_params(-3.0), state, cfg, t=1)
    assert up.layers[0][0][0, 0] < 0.0 < down.layers[0][0][0, 0]


def test_moments_decay_between_steps():
    params = scalar_params(1.0)
    cfg = TrainConfig()
    state = AdamState.zeros_like(params)
    _, state = adam_step(params, scalar_params(2.0), state, cfg, t=1)
    m1 = state.m[0][0][0, 0]
    v1 = state.v[0][0][0, 0]
    _, state = adam_step(params, scalar_params(0.0), state, cfg, t=2)
    assert state.m[0][0][0, 0] == pytest.approx(cfg.beta1 * m1, rel=1e-12)
    assert state.v[0][0][0, 0] == pytest.approx(cfg.beta2 * v1, rel=1e-12)


def test_rejects_zero_based_step_index():
    params = scalar_params(1.0)
    state = AdamState.zeros_like(params)
    with pytest.raises(ValueError):
        adam_step(params, scalar_params(1.0), state, TrainConfig(), t=0)


def test_does_not_mutate_inputs():
    params = scalar_params(1.0)
    grads = scalar_params(0.5)
    state = AdamState.zeros_like(params)
    snapshot = params.layers[0][0].copy()
    adam_step(params, grads, state, TrainConfig(), t=1)
    assert np.array_equal(params.layers[0][0], snapshot)
    assert np.all(state.m[0][0] == 0.0)


def test_output_stays_float32():
    params = scalar_params(1.0)
    state = AdamState.zeros_like(params)
    new_params, _ = adam_step(params, scalar_params(0.5), state, TrainConfig(), t=1)
    assert new_params.layers[0][0].dtype == np.float32
    assert new_params.layers[0][1].dtype == np.float32
