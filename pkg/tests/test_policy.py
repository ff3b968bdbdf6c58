import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from netmpg.policy import (PolicyProfile, epsilon_explore, joint_action_prob, log_prob, log_prob_grad,
                           params_from_json, params_to_json, prob_grad, sample_action, softmax_probs,
                           softmax_table)

finite = st.floats(-20, 20, allow_nan=False)


def test_softmax_examples():
    np.testing.assert_allclose(softmax_probs(np.log([[1.0, 3.0]]), 0), [0.25, 0.75], atol=1e-15)
    np.testing.assert_array_equal(softmax_table(np.zeros((2, 3))), np.full((2, 3), 1 / 3))


def test_softmax_is_overflow_safe():
    p = softmax_table(np.array([[1000.0, 0.0]]))
    assert np.all(np.isfinite(p)) and p[0, 0] == 1.0


def test_log_prob_grad_example():
    g = log_prob_grad(np.zeros((2, 2)), 1, 0)
    np.testing.assert_array_equal(g, [[0, 0], [0.5, -0.5]])


@given(arrays(float, (3, 4), elements=finite), st.integers(0, 2), st.integers(0, 3))
def test_log_prob_grad_bounded_and_row_sparse(theta, s, a):
    g = log_prob_grad(theta, s, a)
    assert np.linalg.norm(g) <= np.sqrt(2) + 1e-12
    assert np.all(np.delete(g, s, axis=0) == 0)
    assert abs(g[s].sum()) <= 1e-12


@given(arrays(float, (2, 3), elements=st.floats(-3, 3)), st.integers(0, 1), st.integers(0, 2))
def test_log_prob_grad_matches_finite_differences(theta, s, a):
    h = 1e-6
    fd = np.zeros_like(theta)
    for idx in np.ndindex(*theta.shape):
        tp, tm = theta.copy(), theta.copy()
        tp[idx] += h
        tm[idx] -= h
        fd[idx] = (log_prob(tp, s, a) - log_prob(tm, s, a)) / (2 * h)
    np.testing.assert_allclose(log_prob_grad(theta, s, a), fd, atol=1e-7)
    np.testing.assert_allclose(prob_grad(theta, s, a), softmax_probs(theta, s)[a] * log_prob_grad(theta, s, a))


@given(st.floats(0, 1), arrays(float, (3, 4), elements=finite))
def test_epsilon_floor(eps, theta):
    mixed = epsilon_explore([softmax_table(theta)], eps)[0]
    assert np.all(mixed >= eps / 4 - 1e-15)
    np.testing.assert_allclose(mixed.sum(axis=1), 1.0)


def test_epsilon_limits():
    t = softmax_table(np.array([[2.0, -1.0, 0.0]]))
    np.testing.assert_array_equal(epsilon_explore([t], 0.0)[0], t)
    np.testing.assert_allclose(epsilon_explore([t], 1.0)[0], np.full((1, 3), 1 / 3))
    for bad in (-0.1, 1.5):
        with pytest.raises(ValueError):
            epsilon_explore([t], bad)


def test_profile_validation():
    with pytest.raises(ValueError):
        PolicyProfile((np.array([[0.5, 0.6]]),))
    with pytest.raises(ValueError):
        PolicyProfile((np.array([[1.5, -0.5]]),))


def test_sample_action_frequencies():
    rng = np.random.default_rng(7)
    prof = PolicyProfile((np.array([[0.2, 0.8]]), np.array([[0.5, 0.25, 0.25]])))
    N = 40_000
    counts = np.zeros((2, 3))
    for _ in range(N):
        a = sample_action(prof, (0, 0), rng)
        counts[0, a[0]] += 1
        counts[1, a[1]] += 1
    for p, c in ((np.array([0.2, 0.8]), counts[0, :2]), (np.array([0.5, 0.25, 0.25]), counts[1])):
        assert np.all(np.abs(c / N - p) <= 4 * np.sqrt(p * (1 - p) / N))
    assert joint_action_prob(prof, (0, 0), (1, 0)) == 0.8 * 0.5


def test_params_json_layout():
    theta = [np.array([[0.0, 1.5], [-2.0, 3.0]]), np.array([[1.0, 2.0, 3.0]])]
    text = params_to_json(theta)
    assert json.loads(text)["1"] == [[1.0, 2.0, 3.0]]
    back = params_from_json(text)
    for a, b in zip(theta, back):
        np.testing.assert_array_equal(a, b)
