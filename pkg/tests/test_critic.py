import numpy as np
import pytest

from netmpg.critic import (CriticConfig, CriticDivergence, FeatureMap, collect_trajectory, generalized_td,
                           make_features, q_hat, restrict, rollout, td_functional, td_lambda_local)
from netmpg.game import random_game
from netmpg.graph import Graph
from netmpg.policy import softmax_profile

from conftest import random_theta


def test_onehot_concat_dimension_example():
    f = FeatureMap(0, (0, 1, 2), (4, 4, 5), 3, "onehot-concat")
    assert f.dim == 16
    v = f.vector((1, 0, 4), 2)
    assert np.count_nonzero(v) == 4
    assert np.linalg.norm(v) == pytest.approx(1.0)


def test_tabular_features_are_unit_basis(line3):
    f = make_features(line3, 1, 1, "tabular")
    assert f.dim == 16
    np.testing.assert_array_equal(f.matrix(), np.eye(16))


def test_features_reject_small_radius(rng):
    game = random_game(Graph.path(3), kappa_r=1, rng=rng)
    with pytest.raises(ValueError):
        make_features(game, 0, 0)
    with pytest.raises(ValueError):
        FeatureMap(0, (0,), (2,), 2, "polynomial")


def test_q_hat_dimension_check(line3):
    f = make_features(line3, 0, 1)
    assert q_hat(f, np.arange(f.dim, dtype=float), (1, 0), 1) == 5.0
    with pytest.raises(ValueError):
        q_hat(f, np.zeros(f.dim + 1), (0, 0), 0)


def test_config_validation():
    for kw in ({"alpha": 0.0}, {"lam": 1.0}, {"eps": 2.0}, {"K": -1}):
        with pytest.raises(ValueError):
            CriticConfig(**kw)


def test_eps_zero_warns(line2, rng):
    prof = softmax_profile(random_theta(line2, rng))
    with pytest.warns(UserWarning):
        collect_trajectory(line2, prof, 0.0, 5, rng)


def test_generalized_td_reproduces_algorithm(line3, rng):
    prof = softmax_profile(random_theta(line3, rng))
    traj = collect_trajectory(line3, prof, 0.1, 300, rng)
    for lam in (0.0, 0.7):
        cfg = CriticConfig(K=300, alpha=0.05, lam=lam, eps=0.1, kappa_c=1)
        for mode in ("tabular", "onehot-concat"):
            feats = [make_features(line3, i, 1, mode) for i in range(3)]
            ws = td_lambda_local(line3, prof, feats, cfg, None, traj=traj)
            for i in range(3):
                rt = restrict(traj, i, feats[i].hood)
                w = generalized_td(rt, feats[i], td_functional(feats[i], line3.gamma), line3.gamma * lam, 0, 0.05)
                assert np.array_equal(w, ws[i])


def test_critic_locality(line3, rng):
    """Agent 0's weights depend only on agents 0 and 1 of a 3-agent line."""
    prof = softmax_profile(random_theta(line3, rng))
    traj = collect_trajectory(line3, prof, 0.1, 200, rng)
    feats = [make_features(line3, i, 1) for i in range(3)]
    cfg = CriticConfig(K=200, alpha=0.05, eps=0.1)
    w = td_lambda_local(line3, prof, feats, cfg, None, traj=traj)[0]
    traj.states[:, 2] = 1 - traj.states[:, 2]
    traj.actions[:, 2] = 1 - traj.actions[:, 2]
    traj.rewards[:, 2] += 5.0
    assert np.array_equal(w, td_lambda_local(line3, prof, feats, cfg, None, traj=traj)[0])


def test_trace_norm_bound(line3, rng):
    prof = softmax_profile(random_theta(line3, rng))
    traj = collect_trajectory(line3, prof, 0.1, 500, rng)
    f = make_features(line3, 1, 1, "onehot-concat")
    rt = restrict(traj, 1, f.hood)
    log = []
    lam_trace = 0.9 * 0.8
    generalized_td(rt, f, td_functional(f, 0.9), lam_trace, 0, 0.01, trace_log=log)
    assert max(log) <= 1.0 / (1.0 - lam_trace) + 1e-12


def test_rollout_deterministic_and_consistent(line3):
    prof = softmax_profile([np.zeros((2, 2))] * 3)
    a = rollout(line3, prof, 50, np.random.default_rng(1))
    b = rollout(line3, prof, 50, np.random.default_rng(1))
    assert np.array_equal(a.states, b.states) and np.array_equal(a.rewards, b.rewards)
    for t in range(50):
        np.testing.assert_array_equal(a.rewards[t], line3.rewards(tuple(a.states[t]), tuple(a.actions[t])))


def test_divergence_raises(line2, rng):
    prof = softmax_profile(random_theta(line2, rng))
    feats = [make_features(line2, i, 1) for i in range(2)]
    cfg = CriticConfig(K=5000, alpha=1e300, eps=0.1)
    with pytest.raises(CriticDivergence):
        with np.errstate(all="ignore"):
            td_lambda_local(line2, prof, feats, cfg, np.random.default_rng(0))


def test_td_converges_toward_averaged_q(line2, rng):
    from netmpg import oracle
    from netmpg.policy import epsilon_explore

    prof = softmax_profile(random_theta(line2, rng))
    feats = [make_features(line2, i, 1) for i in range(2)]
    cfg = CriticConfig(K=40_000, alpha=0.02, eps=0.2)
    ws = td_lambda_local(line2, prof, feats, cfg, np.random.default_rng(3))
    Qbar = oracle.solve(line2, epsilon_explore(prof, 0.2), 0).Qbar.reshape(-1)
    assert np.max(np.abs(ws[0] - Qbar)) <= 0.05 / (1 - line2.gamma)
