import numpy as np
import pytest

from netmpg import oracle
from netmpg.actor import ActorConfig, default_beta, grad_estimate, ipg_exact, localized_actor_critic
from netmpg.critic import CriticConfig, make_features
from netmpg.game import build_chain_example, random_game
from netmpg.graph import Graph
from netmpg.policy import softmax_profile
from netmpg.seeding import substream

from conftest import random_theta


def test_default_beta_values():
    game = random_game(Graph.path(4), gamma=0.9, rng=0)
    assert default_beta(game, 1, "exact") == pytest.approx(0.001 / 18)
    assert default_beta(game, 1, "approx") == pytest.approx(0.001 / 72)
    assert default_beta(game, 3, "exact") == pytest.approx(0.001 / 24)


def test_ipg_step_matches_oracle_gradient(line2, rng):
    theta0 = random_theta(line2, rng)
    theta1, log = ipg_exact(line2, theta0, 0.1, 1)
    for i in range(2):
        np.testing.assert_allclose(theta1[i], theta0[i] + 0.1 * oracle.exact_policy_gradient(line2, theta0, i))
    assert sorted(log.snapshots) == [0, 1]


def test_ipg_improves_chain_objective():
    game, _ = build_chain_example(0.5)
    theta0 = [np.zeros((2, 2))] * 4
    seen = []
    theta, _ = ipg_exact(game, theta0, 1.0, 50, callback=lambda m, th: seen.append(m))
    assert seen == list(range(51))
    J0 = oracle.objective(game, softmax_profile(theta0), 3)
    assert oracle.objective(game, softmax_profile(theta), 3) > J0


def test_grad_estimate_running_average(line2, rng):
    theta = random_theta(line2, rng)
    feats = [make_features(line2, i, 1) for i in range(2)]
    w = [rng.standard_normal(f.dim) for f in feats]
    deltas, etas = grad_estimate(line2, theta, w, feats, 5, 6, np.random.default_rng(0))
    for i in range(2):
        np.testing.assert_allclose(deltas[i], np.mean([e[i] for e in etas], axis=0), atol=1e-14)


def test_grad_estimate_with_exact_q_is_unbiased_for_truncated_gradient():
    """With Qbar from the oracle, the estimator averages to the H-truncated trajectory gradient."""
    rng = np.random.default_rng(2)
    game = random_game(Graph.path(2), gamma=0.6, rng=rng)
    theta = random_theta(game, rng)
    prof = softmax_profile(theta)
    H = 12
    Qbar = [oracle.solve(game, prof, i).Qbar for i in range(2)]
    q_fn = lambda i, s, a: Qbar[i][game.state_index(tuple(s)), a]
    _, etas = grad_estimate(game, theta, None, None, 4000, H, np.random.default_rng(5), q_fn=q_fn)
    for i in range(2):
        samples = np.array([e[i] for e in etas])
        exact = oracle.exact_policy_gradient(game, theta, i)
        tail = np.sqrt(2) * 0.6 ** H * np.abs(Qbar[i]).max() / 0.4
        se = samples.std(axis=0) / np.sqrt(len(samples))
        assert np.all(np.abs(samples.mean(axis=0) - exact) <= 4 * se + tail + 1e-12)


def test_lac_deterministic_and_logs(line2):
    feats = [make_features(line2, i, 1, "onehot-concat") for i in range(2)]
    cfg = ActorConfig(M=20, H=5, beta=0.05, critic=CriticConfig(K=20, alpha=0.05, eps=0.1), snapshot_every=10)
    runs = []
    for _ in range(2):
        theta, log = localized_actor_critic(line2, cfg, feats, substream(3, "critic"), substream(3, "actor"),
                                            keep_weights_every=5)
        runs.append((theta, log))
    for a, b in zip(runs[0][0], runs[1][0]):
        assert np.array_equal(a, b)
    assert sorted(runs[0][1].snapshots) == [0, 10, 20]
    assert sorted(runs[0][1].critic_weights) == [0, 5, 10, 15]


def test_lac_rejects_small_critic_radius(rng):
    game = random_game(Graph.path(3), kappa_r=1, rng=rng)
    feats = [make_features(game, i, 1) for i in range(3)]
    cfg = ActorConfig(M=1, critic=CriticConfig(kappa_c=0))
    with pytest.raises(ValueError):
        localized_actor_critic(game, cfg, feats, np.random.default_rng(0), np.random.default_rng(1))


def test_actor_config_validation():
    with pytest.raises(ValueError):
        ActorConfig(beta=0.0)


def test_substreams_are_independent_and_stable():
    a = substream(0, "critic").random(3)
    assert np.array_equal(a, substream(0, "critic").random(3))
    assert not np.array_equal(a, substream(0, "actor").random(3))
    assert not np.array_equal(a, substream(1, "critic").random(3))
